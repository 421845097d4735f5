use super::{Aux, Evaluation, Evaluator, ALL, TOP};
use crate::game::{Action, Square};
use crate::tracking::synopsis::plane;
use crate::tracking::Synopsis;

/// Pawn, knight, bishop, rook, queen.
const WEIGHTS: [f32; 5] = [1.0, 3.0, 3.0, 5.0, 9.0];

/// Material count with a king-capture bias.
///
/// Value is `tanh((own - opposing) / 10)`. Opposing material counts a piece
/// kind on a square as 1 when it is there in every state and 0.5 when only
/// in some. The policy is uniform except that moves onto a square where the
/// opposing king definitely stands get 100 times the weight.
#[derive(Clone, Copy, Debug, Default)]
pub struct Heuristic;

pub const KING_CAPTURE_BOOST: f32 = 100.0;

impl Heuristic {
    pub fn material(s: &Synopsis) -> (f32, f32) {
        let mut own = 0.0;
        let mut opp = 0.0;
        for (k, w) in WEIGHTS.iter().enumerate() {
            own += w * s.plane(plane::OWN_PIECES + k).count() as f32;
            let def = s.plane(plane::DEF_OPP + k);
            let poss = s.plane(plane::POSS_OPP + k) & !def;
            opp += w * (def.count() as f32 + 0.5 * poss.count() as f32);
        }
        (own, opp)
    }

    pub fn value(s: &Synopsis) -> f32 {
        let (own, opp) = Heuristic::material(s);
        ((own - opp) / 10.0).tanh()
    }

    pub fn policy(s: &Synopsis, actions: &[Action]) -> Vec<f32> {
        let king = s.plane(plane::DEF_OPP + 5);
        let oriented = |sq: Square| if s.perspective == crate::game::Color::Black { sq.flip_rank() } else { sq };
        let mut p: Vec<f32> = actions
            .iter()
            .map(|a| match a {
                Action::Move(m) if king.contains(oriented(m.to)) => KING_CAPTURE_BOOST,
                _ => 1.0,
            })
            .collect();
        let sum: f32 = p.iter().sum();
        p.iter_mut().for_each(|x| *x /= sum);
        p
    }
}

impl Evaluator for Heuristic {
    fn headsets(&self) -> Vec<String> {
        vec![TOP.to_string(), ALL.to_string()]
    }

    fn evaluate(&self, batch: &[(&Synopsis, &[Action])], _headset: &str) -> Vec<Evaluation> {
        batch
            .iter()
            .map(|(s, actions)| Evaluation {
                policy: Heuristic::policy(s, actions),
                value: Heuristic::value(s),
                aux: None::<Aux>,
            })
            .collect()
    }
}
