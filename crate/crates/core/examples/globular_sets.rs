use globwb::globset::{self, CoglobFamily};
use globwb::tree::Tree;

fn main() {
    let a: Tree = "[[[][]][]]".parse().unwrap();
    let x = globset::realize(&a);
    println!("realize {a}: counts {:?}", x.counts());

    let fam = CoglobFamily::globes(4);
    for m in 1..=4 {
        let l = globset::latching(&fam, m).unwrap();
        let s = globset::sphere(m as isize - 1);
        let iso = globset::find_iso(&l.apex.padded(s.dims()), &s).is_some();
        println!("latching at {m}: counts {:?}, sphere S^{}: {iso}", l.apex.trimmed_counts(), m - 1);
    }

    let inc = globset::sphere_inclusion(2);
    println!("S^1 -> D_2 classify(m=1): {:?}", globset::classify(&inc, 1));
}
