fn main() { std::process::exit(crossval::cli::main()); }
