//! Masked focal loss and its gradient on a few logits, next to plain BCE.

use rdbev::metrics::{masked_focal_loss, masked_focal_loss_grad, FocalLossParams};

fn main() -> rdbev::Result<()> {
    let logits = [-3.0, -0.5, 0.0, 0.5, 3.0, 2.0];
    let labels = [false, false, true, true, true, false];
    // the last cell is unknown and must not contribute
    let mask = [true, true, true, true, true, false];

    for params in [
        FocalLossParams::default(),
        FocalLossParams { gamma: 0.0, alpha: 0.5 },
        FocalLossParams {
            gamma: 5.0,
            alpha: 0.25,
        },
    ] {
        let loss = masked_focal_loss(&logits, &labels, &mask, &params)?;
        let grad = masked_focal_loss_grad(&logits, &labels, &mask, &params)?;
        let g: Vec<String> = grad.iter().map(|v| format!("{v:+.4}")).collect();
        println!(
            "gamma {:.1} alpha {:.2}: loss {loss:.6}, grad [{}]",
            params.gamma,
            params.alpha,
            g.join(" ")
        );
    }
    let one = masked_focal_loss(&[0.0], &[true], &[true], &FocalLossParams::default())?;
    println!("single positive at logit 0: {one:.7} (= 0.25 * 0.25 * ln 2)");
    Ok(())
}
