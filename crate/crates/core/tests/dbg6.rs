use downup::density;
use downup::transforms::*;
use std::time::Instant;

#[test]
fn dbg_pairs() {
    let f = density::exponential(1.0);
    for &(alpha, beta) in &[(3.0f64, 2.0f64), (1.0, 2.0), (0.0, 0.5)] {
        let t0 = Instant::now();
        let d = bip_down(&f, alpha, beta).unwrap();
        let t1 = Instant::now();
        let back = bip_up(&d, alpha, beta, None);
        let t2 = Instant::now();
        match back {
            Ok(b) => println!("({alpha},{beta}): down {:?} up {:?} diff {:.3e}", t1-t0, t2-t1, aligned_sup_diff(&f, &b, 32)),
            Err(e) => println!("({alpha},{beta}): ERR {e}"),
        }
    }
}

#[test]
fn dbg_lin() {
    let f = density::linear();
    for &alpha in &[0.0f64, 1.5, 3.0] {
        let m = up(&f, alpha, None).unwrap();
        println!("alpha={alpha}: up support {:?}", m.support());
        match down(&m, alpha) {
            Ok(b) => println!("  back {:?} diff {:.3e}", b.support(), aligned_sup_diff(&f, &b, 32)),
            Err(e) => println!("  ERR {e}"),
        }
    }
}
