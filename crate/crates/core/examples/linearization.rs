use globwb::tree::Tree;

fn main() {
    let a: Tree = "[[[][]][]]".parse().unwrap();
    for (i, x) in a.linearization().iter().enumerate() {
        println!(
            "{i}: {:<12} cyl{}  new leaf {:?}  {}",
            x.klass.to_string(),
            x.klass.case(),
            x.sector.new_leaf(),
            x.tree
        );
    }
}
