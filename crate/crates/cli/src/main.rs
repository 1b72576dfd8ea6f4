fn main() {
    std::process::exit(otkit::run(std::env::args_os()));
}
