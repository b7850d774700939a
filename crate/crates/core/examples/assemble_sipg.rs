//! Assemble the interior-penalty stiffness on a few meshes and look at its
//! basic properties: symmetry, the broken norm and the Galerkin projection
//! error of a smooth function.


use stochwave::dg::{assemble_stiffness, broken_norm_error, galerkin_project, DGSpace, SmoothFn};

fn main() -> stochwave::Result<()> {
    let space = DGSpace::unit(4, 1)?;
    let a = assemble_stiffness(&space);
    let dense = a.matrix().to_dense();
    println!("p = 1, 4 cells, sigma0 = {}: {} dofs", space.sigma0(), space.n_dofs());
    println!("{dense:.3}");
    println!("asymmetry: {:e}", (&dense - dense.transpose()).amax());

    let f = SmoothFn::sine(1.0, 0.0, 1.0, 1.0);
    for p in 1..=3 {
        let mut prev: Option<f64> = None;
        print!("p = {p}, broken-norm error of the Galerkin projection of sin(pi x):");
        for k in 2..=6 {
            let space = DGSpace::unit(1 << k, p)?;
            let stiff = assemble_stiffness(&space);
            let u = galerkin_project(&space, &stiff, &f)?;
            let e = broken_norm_error(&space, &f, &u)?;
            match prev {
                Some(q) => print!("  {e:.2e} (order {:.2})", (q / e).log2()),
                None => print!("  {e:.2e}"),
            }
            prev = Some(e);
        }
        println!();
    }
    Ok(())
}
