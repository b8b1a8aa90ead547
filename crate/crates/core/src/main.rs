fn main() {
    std::process::exit(ostrowski::cli::main());
}
