use downup::density;
use downup::transforms::*;
use std::time::Instant;

#[test]
fn dbg_pair12() {
    let f = density::exponential(1.0);
    let t0 = Instant::now();
    let d = bip_down(&f, 1.0, 2.0).unwrap();
    eprintln!("down(1,2) {:?} sup {:?} hint {:?}", t0.elapsed(), d.support(), d.undo_hint());
    let t1 = Instant::now();
    let b = bip_up(&d, 1.0, 2.0, None).unwrap();
    eprintln!("up(1,2) {:?} sup {:?}", t1.elapsed(), b.support());
    eprintln!("diff {:.3e}", aligned_sup_diff(&f, &b, 32));
}

#[test]
fn dbg_pair005() {
    let f = density::exponential(1.0);
    let t0 = Instant::now();
    let d = bip_down(&f, 0.0, 0.5).unwrap();
    eprintln!("down(0,.5) {:?} sup {:?} hint {:?}", t0.elapsed(), d.support(), d.undo_hint());
    let t1 = Instant::now();
    let b = bip_up(&d, 0.0, 0.5, None).unwrap();
    eprintln!("up(0,.5) {:?} sup {:?}", t1.elapsed(), b.support());
    eprintln!("diff {:.3e}", aligned_sup_diff(&f, &b, 32));
}

#[test]
fn dbg_pair32_hint() {
    let f = density::exponential(1.0);
    let d = bip_down(&f, 3.0, 2.0).unwrap();
    eprintln!("down(3,2) sup {:?} hint {:?}", d.support(), d.undo_hint());
    let t1 = Instant::now();
    let b = bip_up(&d, 3.0, 2.0, None).unwrap();
    eprintln!("up(3,2) {:?} sup {:?}", t1.elapsed(), b.support());
    eprintln!("diff {:.3e}", aligned_sup_diff(&f, &b, 32));
}
