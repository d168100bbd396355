//! Third-order cross term from two smoothed distributions: parity, skew and
//! the constant self-energy inconsistency.

use resolvent_spectra::corrections::{
    remedy_comparison, scba_constant, scba_with_third, skewness_diagnostic, third_order_from_p, ToyModel,
};
use resolvent_spectra::grid::{symmetric, uniform};
use resolvent_spectra::specfun::lorentzian;
use resolvent_spectra::GridFunction;

fn main() -> resolvent_spectra::Result<()> {
    let x = symmetric(0.0, 30.0, 2001);
    let lor = |w: f64| GridFunction::from_fn(x.clone(), |l| lorentzian(l, w).unwrap());
    let ones = GridFunction::from_fn(x.clone(), |_| 1.0)?;
    let (a, b) = (lor(1.0)?, lor(1.3)?);

    let same = third_order_from_p(&a, &a, &ones, 1.0)?;
    println!("identical inputs: max |Im3| = {:e}", same.im3.iter().fold(0.0f64, |m, v| m.max(v.abs())));

    let t = third_order_from_p(&a, &b, &ones, 1.0)?;
    let s = skewness_diagnostic(&t, &a)?;
    println!(
        "Im3 odd/even {:.3e}/{:.3e}, Re3 odd/even {:.3e}/{:.3e}",
        s.im3_odd_norm, s.im3_even_norm, s.re3_odd_norm, s.re3_even_norm
    );
    println!(
        "skew direction {:+}, sign changes {}, branch splitting {}",
        s.skew_direction, s.im3_sign_changes, s.branch_splitting
    );

    let c = scba_constant(4.0)?;
    println!("\nconstant self-energy, g = 4: Gamma {:?}, Delta {}", c.gamma_width, c.delta_shift);
    let r = scba_with_third(4.0, 0.2)?;
    println!("with third order: consistent {}: {}", r.consistent, r.reason);

    let toy = ToyModel::new(1.0, 0.2, 0.0, uniform(-12.0, 12.0, 801))?;
    let rem = remedy_comparison(&toy)?;
    println!(
        "toy residual: constant {:.3e}, frequency dependent {:.3e}",
        rem.constant_residual, rem.effective_residual
    );
    Ok(())
}
