//! Seeded generator for a plan-correlated toy corpus.
//!
//! Every dialogue has two turns. The opening turn falls in one of four
//! classes by plan type (`GIVE`, `PERFORM`, `PERFORM GAIN`, `PERFORM LOSE`),
//! and the reply is fixed per class, so the reply plan is a function of the
//! opening plan. Object nouns and greeting names are drawn from pools
//! shared by all classes. An opening's rarest words therefore say
//! little about the reply.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{Dialogue, Utterance};

const NAMES: [&str; 24] = [
    "alice", "bob", "carol", "dave", "erin", "frank", "grace", "heidi", "ivan", "judy", "mallory", "niaj", "olivia",
    "peggy", "rupert", "sybil", "trent", "uma", "victor", "walter", "xena", "yusuf", "zara", "quentin",
];

const OBJECTS: [&str; 10] = [
    "website",
    "account",
    "invoice",
    "parcel",
    "voucher",
    "survey",
    "profile",
    "ticket",
    "donation form",
    "membership card",
];

const GAINS: [&str; 3] = ["extra points", "a gift card", "more miles"];
const LOSSES: [&str; 3] = ["your savings", "your account", "the discount"];

const OPENERS: [&str; 3] = ["Hi {name}.", "Hello {name}.", "Good morning {name}."];
const FILLERS: [&str; 3] = ["Hmm.", "Well.", "Okay."];

/// Opening-turn class; the reply depends on this alone.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SyntheticClass {
    Give,
    Perform,
    PerformGain,
    PerformLose,
}

impl SyntheticClass {
    pub const ALL: [SyntheticClass; 4] = [
        SyntheticClass::Give,
        SyntheticClass::Perform,
        SyntheticClass::PerformGain,
        SyntheticClass::PerformLose,
    ];

    fn ask(self, object: &str, rng: &mut ChaCha8Rng) -> String {
        match self {
            SyntheticClass::Give => format!("Could you tell me about the {object}?"),
            SyntheticClass::Perform => format!("Please check the {object}."),
            SyntheticClass::PerformGain => {
                let gain = GAINS.choose(rng).unwrap();
                format!("If you check the {object}, you will gain {gain}.")
            }
            SyntheticClass::PerformLose => {
                let loss = LOSSES.choose(rng).unwrap();
                format!("Check the {object} or you will lose {loss}.")
            }
        }
    }

    pub fn reply(self) -> &'static str {
        match self {
            SyntheticClass::Give => "Please call my bank first.",
            SyntheticClass::Perform => "That could cost me money.",
            SyntheticClass::PerformGain => "Can you explain the offer?",
            SyntheticClass::PerformLose => "I would gain nothing from that.",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SyntheticConfig {
    pub n_dialogues: usize,
    pub seed: u64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig {
            n_dialogues: 300,
            seed: 7,
        }
    }
}

pub fn generate_synthetic(config: &SyntheticConfig) -> Vec<Dialogue> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    (0..config.n_dialogues)
        .map(|i| {
            let class = *SyntheticClass::ALL.choose(&mut rng).unwrap();
            let name = NAMES.choose(&mut rng).unwrap();
            let opener = OPENERS.choose(&mut rng).unwrap().replace("{name}", name);
            let object = OBJECTS.choose(&mut rng).unwrap();
            let ask = class.ask(object, &mut rng);
            let reply = if rng.gen_bool(0.5) {
                format!("{} {}", FILLERS.choose(&mut rng).unwrap(), class.reply())
            } else {
                class.reply().to_string()
            };
            Dialogue {
                dialogue_id: format!("syn-{i:04}"),
                corpus_tag: "synthetic".into(),
                turns: vec![
                    Utterance {
                        speaker: "A".into(),
                        text: format!("{opener} {ask}"),
                        turn_index: 0,
                    },
                    Utterance {
                        speaker: "B".into(),
                        text: reply,
                        turn_index: 1,
                    },
                ],
            }
        })
        .collect()
}
