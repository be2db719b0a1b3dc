fn main() {
    std::process::exit(zoomax::cli::run(std::env::args_os()));
}
