use globwb::theta;
use globwb::tree::Tree;

fn main() {
    let a: Tree = "[[][]]".parse().unwrap();
    let cells = theta::hom(&Tree::globe(1), &a).unwrap();
    for f in &cells {
        for g in &cells {
            let grp = theta::is_admissible_groupoidal(f, g).unwrap();
            let cat = theta::is_admissible_categorical(f, g).unwrap();
            if !grp {
                continue;
            }
            let h = theta::filler(f, g).map(|h| h.data.to_string()).unwrap_or_else(|e| e.to_string());
            println!("{} => {}  categorical: {cat:<5} filler {h}", f.data, g.data);
        }
    }
}
