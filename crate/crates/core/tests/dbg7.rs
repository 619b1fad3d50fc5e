use downup::density;
use downup::transforms::*;

#[test]
fn dbg_up15_image() {
    let f = density::linear();
    let m = up(&f, 1.5, None).unwrap();
    println!("support {:?}", m.support());
    for u in [6.3e-14f64, 1e-10, 1e-7, 1e-5, 1e-3, 0.1, 5.0, 1e3, 1e9, 1e12] {
        println!("m({u:.2e}) = {}", m.pdf(u));
    }
}
