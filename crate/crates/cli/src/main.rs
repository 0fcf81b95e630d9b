fn main() {
    std::process::exit(qstab_cli::run(std::env::args_os()));
}
