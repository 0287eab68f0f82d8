fn main() {
    std::process::exit(contagion::cli::main(std::env::args_os()));
}
