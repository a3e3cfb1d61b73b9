fn main() {
    std::process::exit(arnoldi_gcn::run(std::env::args_os()));
}
