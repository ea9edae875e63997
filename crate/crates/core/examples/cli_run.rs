fn main() {
    for args in [
        vec!["tree", "table", "[[[][]][]]"],
        vec!["theta", "hom", "D2", "D2", "--count"],
        vec!["lins", "D2"],
        vec!["cyl", "boundary", "1"],
    ] {
        let (code, out) = globwb::cli::run(std::iter::once("globwb").chain(args.iter().copied()));
        println!("$ globwb {}  [exit {code}]\n{out}", args.join(" "));
    }
}
