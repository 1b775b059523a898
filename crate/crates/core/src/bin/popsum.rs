fn main() {
    let code = popsum::cli::run(std::env::args_os().skip(1), &mut std::io::stdout().lock(), &mut std::io::stderr().lock());
    std::process::exit(code);
}
