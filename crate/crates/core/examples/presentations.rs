use globwb::theory::library::{
    division_term, generating_cofibrations, groupoidalize, interval_presentation, promote_inverse_term, standard_library,
};
use globwb::theory::Kind;

fn main() {
    let c = generating_cofibrations(2);
    for (n, m) in c.i.iter().chain(&c.j) {
        println!("{n}: {:?} -> {:?}", m.dom.trimmed_counts(), m.cod.trimmed_counts());
    }
    let th = groupoidalize(&standard_library(3, Kind::Groupoidal).unwrap()).unwrap();
    let i = interval_presentation(&th).unwrap();
    println!("interval: counts {:?}, designated {}", i.computad.counts(), i.alpha);
    for n in [1, 2] {
        let s = division_term(&th, n).unwrap();
        println!("division n = {n}: {} factors\n  {}", s.factors.len(), s.composite);
    }
    let p = promote_inverse_term(&th).unwrap();
    println!("promotion: {}", p.composite);
}
