fn main() {
    std::process::exit(drapegeom::cli::run(std::env::args_os()));
}
