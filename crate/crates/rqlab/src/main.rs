fn main() { std::process::exit(rqlab::cli::run()); }
