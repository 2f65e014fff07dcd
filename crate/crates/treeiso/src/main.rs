fn main() {
    std::process::exit(treeiso::run(std::env::args_os()));
}
