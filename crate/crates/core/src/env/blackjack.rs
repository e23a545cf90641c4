//! Blackjack against a fixed dealer, infinite deck.
//!
//! Player sums below 12 are hit automatically, so decisions happen over 200
//! states: player sum 12..=21, dealer card 1..=10 (ace = 1) and whether the
//! player holds a usable ace. The dealer hits until reaching 17 or more. A
//! natural (21 on the first two cards) wins unless the dealer also has one,
//! in which case it is a draw; such a hand is settled on the first step
//! whatever the action.

use alloc::vec;

use rand::{Rng, RngCore};

use crate::{ActionId, DiscreteEnvironment, Environment, Error, FeatureVector, Result, Step};

pub const STICK: ActionId = ActionId(0);
pub const HIT: ActionId = ActionId(1);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlackjackState {
    pub player_sum: u8,
    pub dealer_showing: u8,
    pub usable_ace: bool,
}

impl BlackjackState {
    /// Normalized encoding `(sum / 21, dealer / 10, usable_ace)`.
    pub fn observation(&self) -> FeatureVector {
        FeatureVector::new(vec![
            f64::from(self.player_sum) / 21.0,
            f64::from(self.dealer_showing) / 10.0,
            if self.usable_ace { 1.0 } else { 0.0 },
        ])
        .unwrap()
    }

    /// Index in `0..200`.
    pub fn index(&self) -> usize {
        (usize::from(self.player_sum) - 12) * 20
            + (usize::from(self.dealer_showing) - 1) * 2
            + usize::from(self.usable_ace)
    }
}

/// Card value in 1..=10: ranks are uniform over 13, face cards count 10.
pub fn draw_card(rng: &mut dyn RngCore) -> u8 {
    rng.random_range(1..=13u8).min(10)
}

/// A hand's best total with aces counted as 11 where that does not bust.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Hand {
    pub sum: u8,
    pub usable_ace: bool,
}

impl Hand {
    pub fn add(mut self, card: u8) -> Self {
        if card == 1 && self.sum + 11 <= 21 {
            self.sum += 11;
            self.usable_ace = true;
        } else {
            self.sum += card;
        }
        if self.sum > 21 && self.usable_ace {
            self.sum -= 10;
            self.usable_ace = false;
        }
        self
    }

    pub fn busted(&self) -> bool {
        self.sum > 21
    }
}

/// Player state after drawing `card`, or `None` on a bust.
pub fn apply_card(state: BlackjackState, card: u8) -> Option<BlackjackState> {
    let hand = Hand {
        sum: state.player_sum,
        usable_ace: state.usable_ace,
    }
    .add(card);
    (!hand.busted()).then_some(BlackjackState {
        player_sum: hand.sum,
        usable_ace: hand.usable_ace,
        ..state
    })
}

/// Dealer's final total given the showing card and a stream of further cards.
pub fn dealer_play(showing: u8, mut draw: impl FnMut() -> u8) -> u8 {
    let mut hand = Hand::default().add(showing);
    while hand.sum < 17 {
        hand = hand.add(draw());
    }
    hand.sum
}

/// +1, 0 or -1 from the player's point of view.
pub fn settle(player_sum: u8, dealer_sum: u8) -> f64 {
    if dealer_sum > 21 || player_sum > dealer_sum {
        1.0
    } else if player_sum == dealer_sum {
        0.0
    } else {
        -1.0
    }
}

/// Outcome of one decision.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlackjackOutcome {
    /// `None` once the hand is over.
    pub next: Option<BlackjackState>,
    pub reward: f64,
}

/// Hit draws a card (a bust loses); stick lets the dealer play out.
pub fn blackjack_step(
    state: BlackjackState,
    action: ActionId,
    rng: &mut dyn RngCore,
) -> Result<BlackjackOutcome> {
    match action {
        HIT => Ok(match apply_card(state, draw_card(rng)) {
            Some(next) => BlackjackOutcome {
                next: Some(next),
                reward: 0.0,
            },
            None => BlackjackOutcome {
                next: None,
                reward: -1.0,
            },
        }),
        STICK => {
            let dealer = dealer_play(state.dealer_showing, || draw_card(rng));
            Ok(BlackjackOutcome {
                next: None,
                reward: settle(state.player_sum, dealer),
            })
        }
        other => Err(Error::ActionOutOfRange {
            action: other.0,
            count: 2,
        }),
    }
}

#[derive(Debug, Clone)]
pub struct Blackjack {
    state: BlackjackState,
    natural: bool,
}

impl Default for Blackjack {
    fn default() -> Self {
        Self::new()
    }
}

impl Blackjack {
    pub fn new() -> Self {
        Self {
            state: BlackjackState {
                player_sum: 12,
                dealer_showing: 1,
                usable_ace: false,
            },
            natural: false,
        }
    }

    pub fn state(&self) -> BlackjackState {
        self.state
    }

    pub fn has_natural(&self) -> bool {
        self.natural
    }

    /// Deals a fresh hand from explicit cards (for tests and replays).
    pub fn deal_with(
        &mut self,
        player: [u8; 2],
        dealer_showing: u8,
        mut extra: impl FnMut() -> u8,
    ) -> FeatureVector {
        let mut hand = Hand::default().add(player[0]).add(player[1]);
        self.natural = hand.sum == 21;
        while hand.sum < 12 {
            hand = hand.add(extra());
        }
        self.state = BlackjackState {
            player_sum: hand.sum,
            dealer_showing,
            usable_ace: hand.usable_ace,
        };
        self.state.observation()
    }
}

impl Environment for Blackjack {
    fn observation_dim(&self) -> usize {
        3
    }

    fn action_count(&self) -> usize {
        2
    }

    fn reset(&mut self, rng: &mut dyn RngCore) -> FeatureVector {
        let player = [draw_card(rng), draw_card(rng)];
        let showing = draw_card(rng);
        self.deal_with(player, showing, || draw_card(rng))
    }

    fn step(&mut self, action: ActionId, rng: &mut dyn RngCore) -> Result<Step> {
        let observation = self.state.observation();
        if action.0 >= 2 {
            return Err(Error::ActionOutOfRange {
                action: action.0,
                count: 2,
            });
        }
        if self.natural {
            self.natural = false;
            let dealer = Hand::default()
                .add(self.state.dealer_showing)
                .add(draw_card(rng));
            let reward = if dealer.sum == 21 { 0.0 } else { 1.0 };
            return Ok(Step {
                observation,
                reward,
                terminal: true,
            });
        }
        let out = blackjack_step(self.state, action, rng)?;
        Ok(match out.next {
            Some(next) => {
                self.state = next;
                Step {
                    observation: next.observation(),
                    reward: out.reward,
                    terminal: false,
                }
            }
            None => Step {
                observation,
                reward: out.reward,
                terminal: true,
            },
        })
    }
}

impl DiscreteEnvironment for Blackjack {
    fn state_count(&self) -> usize {
        200
    }

    fn state_id(&self) -> usize {
        self.state.index()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seeded_rng;

    #[test]
    fn twenty_one_beats_busting_dealer() {
        let mut cards = [10u8, 10].into_iter();
        let dealer = dealer_play(6, || cards.next().unwrap());
        assert_eq!(dealer, 26);
        assert_eq!(settle(21, dealer), 1.0);
    }

    #[test]
    fn hit_on_twelve_with_ten_busts() {
        let s = BlackjackState {
            player_sum: 12,
            dealer_showing: 4,
            usable_ace: false,
        };
        assert_eq!(apply_card(s, 10), None);
    }

    #[test]
    fn soft_hand_survives_a_ten() {
        let s = BlackjackState {
            player_sum: 13,
            dealer_showing: 4,
            usable_ace: true,
        };
        assert_eq!(
            apply_card(s, 10),
            Some(BlackjackState {
                player_sum: 13,
                dealer_showing: 4,
                usable_ace: false
            })
        );
    }

    #[test]
    fn dealer_stands_on_soft_seventeen() {
        let mut cards = [6u8].into_iter();
        assert_eq!(dealer_play(1, || cards.next().unwrap()), 17);
    }

    #[test]
    fn ties_push() {
        assert_eq!(settle(19, 19), 0.0);
        assert_eq!(settle(18, 20), -1.0);
    }

    #[test]
    fn natural_settles_on_first_step() {
        let mut env = Blackjack::new();
        env.deal_with([1, 10], 5, || unreachable!());
        assert!(env.has_natural());
        let step = env.step(HIT, &mut seeded_rng(0)).unwrap();
        assert!(step.terminal);
        assert!(step.reward >= 0.0);
    }

    #[test]
    fn small_hands_are_topped_up() {
        let mut env = Blackjack::new();
        let mut extra = [5u8, 3].into_iter();
        env.deal_with([2, 3], 7, || extra.next().unwrap());
        assert_eq!(env.state().player_sum, 13);
    }

    #[test]
    fn state_index_is_a_bijection() {
        let mut seen = [false; 200];
        for sum in 12..=21 {
            for dealer in 1..=10 {
                for ace in [false, true] {
                    let i = BlackjackState {
                        player_sum: sum,
                        dealer_showing: dealer,
                        usable_ace: ace,
                    }
                    .index();
                    assert!(!seen[i]);
                    seen[i] = true;
                }
            }
        }
    }
}
