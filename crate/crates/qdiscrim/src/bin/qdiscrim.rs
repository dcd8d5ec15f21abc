fn main() {
    std::process::exit(qdiscrim::cli::run());
}
