fn main() {
    std::process::exit(klyshko_sim::main_with_args(std::env::args_os()));
}
