fn main() {
    ncid_cli::configure_threads();
    let (code, out) = ncid_cli::run(std::env::args_os().skip(1));
    println!("{out}");
    std::process::exit(code);
}
