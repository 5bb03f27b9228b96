fn main() {
    std::process::exit(slepiankit_cli::run_mesh_cli(std::env::args_os()));
}
