fn main() {
    let code = isolation_game::cli::execute(std::env::args_os());
    std::process::exit(code);
}
