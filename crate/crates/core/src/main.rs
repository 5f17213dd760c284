fn main() {
    std::process::exit(gaugekit::runner::cli_main());
}
