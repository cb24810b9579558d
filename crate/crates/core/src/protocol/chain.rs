//! Multi-hop chain `E_0 = Alice, E_1, …, E_hops = Bob`.
//!
//! Adjacent parties share unrotated `|ψ_{0,0}⟩` pairs. Alice teleports
//! `U_{b_r}|s_r⟩` to `E_1` and every intermediate forwards what it received
//! without correcting it. Each sender publishes both its `k` and `l`
//! strings; Bob multiplies the inverse byproducts together as Pauli
//! exponents, applies the result and `U_{b_r}⁻¹`, and reads `s_r` directly.

use crate::bases::{bell_pair, mub_family, GeneralizedPauli};
use crate::channel::ChannelModel;
use crate::error::{invalid, Result};
use crate::state::{MeasurementBasis, StateVector};
use crate::teleport::{bell_measure, correction_pauli, Outcome};

use super::transcript::{from_payload, to_payload};
use super::{
    final_digit_check, recycle_verified, transmit, CheckMode, KeyResult, MessageKind, Party, SessionConfig, Streams,
    Transcript, INPUT,
};

#[derive(Debug, Clone, PartialEq)]
pub struct ChainConfig {
    pub base: SessionConfig,
    pub hops: usize,
    /// Channel on each link, `E_h → E_{h+1}`.
    pub per_hop_channel: Vec<ChannelModel>,
}

impl ChainConfig {
    /// Every link uses `base.channel`.
    pub fn uniform(base: SessionConfig, hops: usize) -> Self {
        let per_hop_channel = vec![base.channel.clone(); hops];
        Self {
            base,
            hops,
            per_hop_channel,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.base.validate()?;
        if self.hops == 0 {
            return Err(invalid("hops", "a chain needs at least one hop"));
        }
        if self.per_hop_channel.len() != self.hops {
            return Err(invalid(
                "channel",
                format!("{} per-hop channels for {} hops", self.per_hop_channel.len(), self.hops),
            ));
        }
        if self.base.check_mode != CheckMode::FinalDigits {
            return Err(invalid("check_mode", "the chain checks final digits only"));
        }
        for channel in &self.per_hop_channel {
            channel.validate(self.base.d)?;
        }
        Ok(())
    }
}

fn party(h: usize, hops: usize) -> Party {
    match h {
        0 => Party::Alice,
        h if h == hops => Party::Bob,
        h => Party::Relay(h),
    }
}

fn tx(h: usize) -> String {
    format!("E{h}.tx")
}

fn rx(h: usize) -> String {
    format!("E{h}.rx")
}

pub fn run_chain(config: &ChainConfig) -> Result<KeyResult> {
    config.validate()?;
    let base = &config.base;
    let (d, hops) = (base.d, config.hops);
    let family = mub_family(d, base.m)?;
    let mut streams = Streams::new(base.seed);
    let mut transcript = Transcript::default();
    let total = 2 * base.n;

    let b: Vec<usize> = (0..total).map(|_| streams.alice.below(base.m)).collect();

    // Link h joins E_h (holding E{h}.tx) and E_{h+1} (holding E{h+1}.rx).
    // Whatever Eve took from a link is discarded on the spot.
    let mut links: Vec<Vec<StateVector>> = vec![Vec::with_capacity(total); hops];
    for (h, link) in links.iter_mut().enumerate() {
        let (sender, receiver) = (tx(h), rx(h + 1));
        for r in 0..total {
            let mut prepare = || bell_pair(d, &sender, &receiver);
            let slot = transmit(
                &mut prepare,
                &receiver,
                &config.per_hop_channel[h],
                r,
                party(h, hops),
                party(h + 1, hops),
                &mut streams.channel,
                &mut transcript,
            )?;
            let eve = slot.eve.labels();
            let state = if eve.is_empty() {
                slot.state
            } else {
                slot.state.discard(&eve, &mut streams.eve)?
            };
            link.push(state);
        }
        transcript.push(
            party(h + 1, hops),
            party(h, hops),
            MessageKind::AckReceived,
            vec![total as i64],
        );
    }

    // Teleport hop by hop.
    let s: Vec<usize> = (0..total).map(|_| streams.alice.below(d)).collect();
    let mut k = vec![Vec::with_capacity(total); hops];
    let mut l = vec![Vec::with_capacity(total); hops];
    let mut recycled = 0;
    let mut arrived = Vec::with_capacity(total);
    for r in 0..total {
        let mut carrier = INPUT.to_string();
        let mut state = StateVector::basis_state(INPUT, d, s[r])?.apply_unitary(family.unitary(b[r]), &[INPUT])?;
        for h in 0..hops {
            let joint = state.tensor(&links[h][r])?;
            let m = bell_measure(&joint, &carrier, &tx(h), Outcome::Sample(&mut streams.quantum))?;
            recycled += usize::from(recycle_verified(&m.residual, m.k, m.l)?);
            k[h].push(m.k);
            l[h].push(m.l);
            state = m.rest;
            carrier = rx(h + 1);
        }
        arrived.push(state);
    }
    for h in 0..hops {
        transcript.push(party(h, hops), Party::All, MessageKind::PublishK, to_payload(&k[h]));
        transcript.push(party(h, hops), Party::All, MessageKind::PublishL, to_payload(&l[h]));
    }
    transcript.push(Party::Alice, Party::All, MessageKind::PublishB, to_payload(&b));

    // Bob
    let mut heard = Vec::with_capacity(hops);
    for h in 0..hops {
        heard.push((
            from_payload(transcript.published(party(h, hops), MessageKind::PublishK)?)?,
            from_payload(transcript.published(party(h, hops), MessageKind::PublishL)?)?,
        ));
    }
    let heard_b = from_payload(transcript.published(Party::Alice, MessageKind::PublishB)?)?;
    let computational = MeasurementBasis::computational(d);
    let bob_label = rx(hops);
    let mut bob = Vec::with_capacity(total);
    for (r, state) in arrived.iter().enumerate() {
        // B_{h-1}⋯B_0 is undone by C_0 C_1 ⋯ C_{h-1}.
        let mut undo = GeneralizedPauli::identity(d)?;
        for (hk, hl) in &heard {
            undo = undo.compose(&correction_pauli(d, hk[r], hl[r])?).0;
        }
        let op = family.unitary(heard_b[r]).adjoint().compose(&undo.matrix())?;
        let m =
            state
                .apply_unitary(&op, &[&bob_label])?
                .measure(&[&bob_label], &computational, &mut streams.quantum)?;
        bob.push(m.outcome);
    }

    final_digit_check(base, s, bob, None, recycled, &mut streams.alice, transcript)
}
