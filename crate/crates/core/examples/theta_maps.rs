use globwb::theta;
use globwb::tree::Tree;

fn main() {
    for (k, j) in [(1, 1), (1, 2), (2, 2), (2, 3)] {
        println!("|hom(D{k}, D{j})| = {}", theta::hom_count(&Tree::globe(k), &Tree::globe(j)));
    }
    let a: Tree = "[[[][]][]]".parse().unwrap();
    let homs = theta::hom(&Tree::globe(1), &a).unwrap();
    println!("hom(D1, {a}): {} maps", homs.len());
    for f in homs.iter().take(6) {
        let hg = theta::hg_factorize(f);
        println!(
            "  {}  homogeneous: {:<5}  via {}",
            f.data,
            theta::is_homogeneous(f),
            hg.globular.source
        );
    }
    let g = &theta::hom(&a, &a.suspend()).unwrap()[0];
    println!("composite: {}", theta::compose(&homs[3], g).unwrap());
}
