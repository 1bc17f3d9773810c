use crate::real::Real;

use super::genome::{MlpGenome, OUTPUTS};
use super::lif::TernaryActivation;
use super::NetError;

#[inline]
fn logistic<R: Real>(x: R) -> R {
    R::one() / (R::one() + (-x).exp())
}

/// Raw sigmoid outputs of the three output neurons.
pub fn mlp_outputs<R: Real>(genome: &MlpGenome<R>, input: &[R]) -> Result<[R; OUTPUTS], NetError> {
    let ni = genome.input_count;
    let nh = genome.hidden_count;
    if input.len() != ni {
        return Err(NetError::DimensionMismatch { expected: ni, found: input.len() });
    }
    let mut out = [R::zero(); OUTPUTS];
    for h in 0..nh {
        let mut sum = R::zero();
        for (i, &x) in input.iter().enumerate() {
            let link = genome.input_hidden[i * nh + h];
            if link.enabled {
                sum += link.weight * x;
            }
        }
        let act = logistic(sum);
        for (o, acc) in out.iter_mut().enumerate() {
            let link = genome.hidden_output[h * OUTPUTS + o];
            if link.enabled {
                *acc += link.weight * act;
            }
        }
    }
    Ok(out.map(logistic))
}

/// An output is high when its activation is strictly above 0.5.
pub fn mlp_activate<R: Real>(genome: &MlpGenome<R>, input: &[R]) -> Result<TernaryActivation, NetError> {
    let half = R::lit(0.5);
    let out = mlp_outputs(genome, input)?;
    Ok(TernaryActivation::new(out[0] > half, out[1] > half, out[2] > half))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::neuronet::genome::Link;

    fn full(input_count: usize, hidden: usize, w: f64) -> MlpGenome<f64> {
        let mut g = MlpGenome::empty(input_count, hidden);
        for l in g.links_mut() {
            *l = Link::on(w);
        }
        g
    }

    #[test]
    fn zero_weights_sit_on_the_boundary() {
        let g = full(2, 1, 0.0);
        let out = mlp_outputs(&g, &[0.3, 0.9]).unwrap();
        assert!(out.iter().all(|&v| v == 0.5));
        assert_eq!(mlp_activate(&g, &[0.3, 0.9]).unwrap(), TernaryActivation::new(false, false, false));
    }

    #[test]
    fn positive_path_is_high() {
        let g = full(1, 1, 1.0);
        // hidden = logistic(1) = 0.7311; output = logistic(0.7311) = 0.675
        let out = mlp_outputs(&g, &[1.0]).unwrap();
        let hidden = 1.0 / (1.0 + (-1.0f64).exp());
        let expected = 1.0 / (1.0 + (-hidden).exp());
        assert!((out[0] - expected).abs() < 1e-15);
        assert!((expected - 0.67503753).abs() < 1e-8);
        assert_eq!(mlp_activate(&g, &[1.0]).unwrap(), TernaryActivation::new(true, true, true));
    }

    #[test]
    fn disabled_link_equals_zero_weight() {
        let mut a = full(2, 2, 0.7);
        let mut b = a.clone();
        *a.link_mut(1, 3).unwrap() = Link::off();
        b.link_mut(1, 3).unwrap().weight = 0.0;
        let x = [0.4, 0.8];
        assert_eq!(mlp_outputs(&a, &x).unwrap(), mlp_outputs(&b, &x).unwrap());
    }

    #[test]
    fn wrong_input_length() {
        let g = full(2, 1, 0.5);
        assert!(mlp_activate(&g, &[1.0]).is_err());
    }
}
