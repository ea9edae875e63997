use globwb::globset::{check_orthogonal, classify, factor_bij_ff, random_globset, random_map};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut shown = 0;
    while shown < 4 {
        let x = random_globset(&mut rng, 3, 3);
        let y = random_globset(&mut rng, 3, 2);
        let Some(f) = random_map(&mut rng, &x, &y, 500) else { continue };
        let m = shown % 3;
        let (h, g) = factor_bij_ff(&f, m);
        println!("f: {:?} -> {:?}, m = {m}", x.counts(), y.counts());
        println!("  middle {:?}, h {:?}, g {:?}", h.cod.counts(), classify(&h, m), classify(&g, m));
        let d = check_orthogonal(&h, &g, &h, &g).unwrap();
        println!("  diagonal of (h, g) is the identity: {}", d.f.iter().enumerate().all(|(k, v)| v.iter().enumerate().all(|(i, &j)| i == j) || k >= h.cod.dims()));
        shown += 1;
    }
}
