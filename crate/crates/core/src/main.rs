fn main() { std::process::exit(adsflux::harness::cli::main()) }
