fn main() {
    std::process::exit(ramper::cli::main())
}
