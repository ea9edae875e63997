use globwb::tree::{trees_with_nodes, Tree};

fn main() {
    let a = Tree::parse_any("[[[][]][]]").unwrap();
    println!("tree      {a}");
    println!("table     {}", a.table());
    println!("dim       {}", a.dim());
    println!("boundary  {}", a.boundary().unwrap());
    println!("suspend   {}", a.suspend());
    println!("from (3,1;0): {}", Tree::parse_any("(3,1;0)").unwrap());
    for n in 1..=5 {
        println!("{n} nodes: {} trees", trees_with_nodes(n).len());
    }
}
