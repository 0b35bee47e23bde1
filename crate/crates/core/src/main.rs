fn main() {
    let mut stdin = std::io::stdin().lock();
    let mut stdout = std::io::stdout().lock();
    let code = isovec::cli::run(std::env::args_os(), &mut stdin, &mut stdout);
    std::process::exit(code);
}
