fn main() {
    std::process::exit(hpnf::cli::run(std::env::args_os()));
}
