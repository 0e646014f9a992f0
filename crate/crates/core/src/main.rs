fn main() {
    std::process::exit(modestab::cli::run(std::env::args()));
}
