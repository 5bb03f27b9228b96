fn main() {
    std::process::exit(slepiankit_cli::run_sphere_cli(std::env::args_os()));
}
