fn main() {
    std::process::exit(sigwin::cli::main());
}
