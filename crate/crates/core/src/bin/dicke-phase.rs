fn main() {
    std::process::exit(dicke_phase::cli::main_with_args(std::env::args_os()));
}
