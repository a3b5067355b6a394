fn main() {
    std::process::exit(snra::cli::run(std::env::args()));
}
