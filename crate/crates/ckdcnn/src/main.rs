fn main() {
    std::process::exit(ckdcnn::cli::run());
}
