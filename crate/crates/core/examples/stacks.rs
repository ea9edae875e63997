use globwb::cylinder::{stack, vcompose_meta, StackSquare};
use globwb::theta;
use globwb::tree::Tree;

fn main() {
    let a: Tree = "[[[][]][]]".parse().unwrap();
    let rho = theta::hom(&Tree::globe(2), &a).unwrap().into_iter().find(theta::is_homogeneous).unwrap();
    let st = stack(&rho).unwrap();
    println!("top {}", st.squares[0].top);
    for sq in &st.squares {
        println!("cyl{} {:<12} [{} | {}]\n  -> {}", sq.case, sq.klass.to_string(), sq.left, sq.right, sq.bottom);
    }
    let metas: Vec<_> = st.squares.iter().map(StackSquare::meta).collect();
    let c = vcompose_meta(&metas).unwrap();
    println!("composite (p, q) = ({:?}, {:?}), {} source sides, {} target sides", c.p, c.q, c.source.len(), c.target.len());
    print!("{}", st.to_dot());
}
