fn main() {
    std::process::exit(perceived_welfare::cli::run(std::env::args_os()));
}
