//! The regular-octagon genus-2 group: relation, domain, reduction and the
//! loop basis with its intersection form.

use adsflux::fuchsian::Surface;
use num_complex::Complex64;

fn main() {
    let s = Surface::standard();
    let rel = s.group.relation_product();
    println!("relation word {:?}", s.group.relation_word);
    println!("|relation − id| = {:.2e}", rel.dist(&adsflux::lie2::MoebiusElt::identity()));
    println!("domain area {:.10} (4π = {:.10})", s.domain.area(), 4.0 * std::f64::consts::PI);

    let z = Complex64::new(2.7, 0.05);
    let r = s.group.reduce(z).unwrap();
    println!("{z} = g·({:.6}) with word {:?}", r.z0, r.word);

    for (k, l) in s.loops.loops.iter().enumerate() {
        println!("loop {k}: {} arcs, length {:.6}", l.arcs().count(), l.length());
    }
    println!("intersection matrix {:?}", s.loops.intersection_matrix());
}
