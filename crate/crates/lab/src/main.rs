fn main() {
    std::process::exit(cyclerisk::cli::run(std::env::args_os()));
}
