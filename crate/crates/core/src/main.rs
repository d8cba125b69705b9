fn main() {
    std::process::exit(survgeo::cli::run(std::env::args_os()));
}
