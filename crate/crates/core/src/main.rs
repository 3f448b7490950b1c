fn main() {
    let argv: Vec<String> = std::env::args().collect();
    let r = felt::cli::run(&argv);
    if r.stderr {
        eprint!("{}", r.out);
    } else {
        print!("{}", r.out);
    }
    std::process::exit(r.exit);
}
