fn main() {
    std::process::exit(vecsect::cli::run());
}
