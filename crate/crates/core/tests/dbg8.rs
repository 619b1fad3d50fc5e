use downup::density;
use downup::transforms::*;
use std::time::Instant;

#[test]
fn dbg_pair32() {
    let f = density::exponential(1.0);
    let t0 = Instant::now();
    let d = bip_down(&f, 3.0, 2.0).unwrap();
    eprintln!("down built {:?}", t0.elapsed());
    let t1 = Instant::now();
    let e = escort(&d, 0.5).unwrap();
    eprintln!("escort built {:?} support {:?}", t1.elapsed(), e.support());
    let t2 = Instant::now();
    let m = up(&e, 1.5, None).unwrap();
    eprintln!("up built {:?} support {:?}", t2.elapsed(), m.support());
    let t3 = Instant::now();
    let diff = aligned_sup_diff(&f, &m, 32);
    eprintln!("diff {diff:.3e} in {:?}", t3.elapsed());
}
