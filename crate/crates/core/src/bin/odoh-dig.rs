fn main() {
    std::process::exit(odoh::dig::run_dig(std::env::args_os()));
}
