fn main() {
    std::process::exit(sosieforge::cli::run());
}
