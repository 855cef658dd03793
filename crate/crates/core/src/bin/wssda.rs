fn main() { std::process::exit(wssda::cli::run(std::env::args_os())) }
