use globwb::cylinder::{coherence_boundary, identity_boundary_modification, modification_presentation, CoherenceKind};
use globwb::theory::library::{groupoidalize, standard_library};
use globwb::theory::Kind;

fn main() {
    let th = groupoidalize(&standard_library(3, Kind::Groupoidal).unwrap()).unwrap();
    for k in 0..=2 {
        let m = modification_presentation(k, &th).unwrap();
        println!("M_{k}: {:?}, data {:?}", m.computad.counts(), m.data);
    }
    let (s, t) = identity_boundary_modification(&th).unwrap();
    println!("identity sides: {s} => {t}");

    let mut th = standard_library(3, Kind::Categorical).unwrap();
    for (kind, idx, level) in [
        (CoherenceKind::Psi, vec![1, 1], 0),
        (CoherenceKind::Psi, vec![2, 1], 1),
        (CoherenceKind::Phi, vec![0, 1, 1], 1),
        (CoherenceKind::Theta, vec![1, 1, 0], 1),
    ] {
        let p = coherence_boundary(kind, &idx, level, &mut th).unwrap();
        println!("{} over {}\n  {}\n  {}", p.extension, p.first.target, p.first, p.second);
    }
}
