fn main() {
    std::process::exit(lizip::cli::run(std::env::args_os()));
}
