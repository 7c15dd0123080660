fn main() {
    std::process::exit(dynamo_core::cli::run(std::env::args_os()));
}
