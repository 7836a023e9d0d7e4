fn main() {
    let code = ccp::cli::run(std::env::args_os(), &mut std::io::stdout().lock());
    std::process::exit(code);
}
