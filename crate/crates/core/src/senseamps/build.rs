use super::*;
use crate::devices::{MtjState, Polarity, Waveform};
use crate::netlist::{ElementLine, Netlist, SourceValue};

const BALANCE_TOLERANCE: f64 = 0.05;

fn pwl(w: &Waveform) -> SourceValue {
    if w.is_dc() {
        SourceValue::Dc(w.points()[0].1)
    } else {
        SourceValue::Pwl(w.points().to_vec())
    }
}

struct Builder {
    elements: Vec<ElementLine>,
}

impl Builder {
    fn push(&mut self, e: ElementLine) {
        self.elements.push(e);
    }

    fn nmos(&mut self, name: &str, d: &str, g: &str, s: &str, size: Size) {
        self.push(ElementLine::mosfet(
            name,
            [d, g, s, "0"],
            Polarity::Nmos,
            size.w,
            size.l,
        ));
    }

    fn pmos(&mut self, name: &str, d: &str, g: &str, s: &str, size: Size) {
        self.push(ElementLine::mosfet(
            name,
            [d, g, s, SUPPLY],
            Polarity::Pmos,
            size.w,
            size.l,
        ));
    }

    fn source(&mut self, name: &str, node: &str, value: SourceValue) {
        self.push(ElementLine::vsource(name, node, "0", value));
    }

    /// Clamp, MTJ stack and access transistor hanging below `top`.
    #[allow(clippy::too_many_arguments)]
    fn column(
        &mut self,
        side: &str,
        top: &str,
        src: &str,
        gate: &str,
        mtjs: &[(String, MtjState, f64)],
        access: Size,
        clamp: Size,
        tox0: f64,
    ) {
        let clamp_name = if side == "d" { "MC" } else { "MR" };
        self.nmos(clamp_name, top, gate, src, clamp);
        let mut upper = src.to_string();
        for (i, (name, state, area)) in mtjs.iter().enumerate() {
            let lower = format!("{side}m{i}");
            self.push(ElementLine::mtj(name, &upper, &lower, *state, *area, tox0));
            upper = lower;
        }
        let access_name = if side == "d" { "MAd" } else { "MAr" };
        self.nmos(access_name, &upper, "wl", "0", access);
    }
}

/// Builds the read circuit of one design for a data cell in `data_state`.
///
/// The netlist carries its own model cards as `.param` lines and a `.tran`
/// directive covering twice the word-line pulse.
pub fn build_design(
    kind: SenseAmpKind,
    reference: ReferenceConfig,
    params: &SenseAmpParams,
    data_state: MtjState,
    timing: &TimingPlan,
) -> Result<Netlist, DesignError> {
    params.validate()?;
    if reference.series_count == 0 {
        return Err(DesignError::EmptyReference);
    }
    if !(reference.area_scale.is_finite() && reference.area_scale > 0.0) {
        return Err(DesignError::NonPositive("area_scale", reference.area_scale));
    }
    let neutralized = params.neutralized(kind)?;
    if neutralized && capacitor_mismatch(params) > BALANCE_TOLERANCE {
        return Err(DesignError::Unbalanced {
            cap: params.neutral_cap_value(),
            clamp: params.clamp_cgd(),
        });
    }

    let mut b = Builder {
        elements: Vec::new(),
    };
    b.source("Vdd", SUPPLY, SourceValue::Dc(timing.vdd));
    b.source("Vwl", "wl", pwl(&timing.wl));
    b.source("Vsae", "sae", pwl(&timing.sae));
    b.source("Vsaeb", "saeb", pwl(&timing.inverted(&timing.sae)));
    if kind != SenseAmpKind::Current {
        b.source("Vsae1", "sae1", pwl(&timing.sae1));
        b.source("Vsae1b", "sae1b", pwl(&timing.inverted(&timing.sae1)));
    }
    b.source("Vc", "vcb", SourceValue::Dc(timing.vc));
    b.source("Vr", "vrb", SourceValue::Dc(timing.vr));
    b.push(ElementLine::resistor(
        "Rbc",
        "vcb",
        NODE_GC,
        params.bias_source_r,
    ));
    b.push(ElementLine::resistor(
        "Rbr",
        "vrb",
        NODE_GR,
        params.bias_source_r,
    ));

    let data = [(DATA_MTJ.to_string(), data_state, params.mtj.area)];
    let refs: Vec<_> = (0..reference.series_count)
        .map(|i| {
            (
                format!("{REF_MTJ_PREFIX}{}", i + 1),
                MtjState::P,
                params.mtj.area * reference.area_scale,
            )
        })
        .collect();
    let ref_access = if params.scale_ref_access {
        Size::new(params.access.w * reference.area_scale, params.access.l)
    } else {
        params.access
    };

    match kind {
        SenseAmpKind::Current => {
            // the clamped bit lines sit at the clamp sources
            b.column(
                "d",
                "nd",
                NODE_BL,
                NODE_GC,
                &data,
                params.access,
                params.csa_clamp,
                params.mtj.tox0,
            );
            b.column(
                "r",
                "nr",
                NODE_REFL,
                NODE_GR,
                &refs,
                ref_access,
                params.csa_clamp,
                params.mtj.tox0,
            );
            b.push(ElementLine::capacitor("Cbl", NODE_BL, "0", params.c_bl));
            b.push(ElementLine::capacitor(
                "Crefl",
                NODE_REFL,
                "0",
                params.c_refl,
            ));
            // the read branches only draw current once SAE enables the header
            b.pmos("MH", "vsa", "saeb", SUPPLY, params.precharge);
            b.pmos("MLd", "nd", "nd", "vsa", params.mirror_load);
            b.pmos("MLr", "nr", "nr", "vsa", params.mirror_load);
            // data current charges SAOUTB, reference current charges SAOUT
            b.pmos("MOd", NODE_SAOUTB, "nd", "vsa", params.mirror_out);
            b.pmos("MOr", NODE_SAOUT, "nr", "vsa", params.mirror_out);
            b.nmos("MN1", NODE_SAOUT, NODE_SAOUTB, "0", params.latch_n);
            b.nmos("MN2", NODE_SAOUTB, NODE_SAOUT, "0", params.latch_n);
            b.nmos("MRS1", NODE_SAOUT, "saeb", "0", params.precharge);
            b.nmos("MRS2", NODE_SAOUTB, "saeb", "0", params.precharge);
            b.nmos("M9", NODE_SAOUT, "saeb", NODE_SAOUTB, params.equalizer);
        }
        SenseAmpKind::Voltage | SenseAmpKind::Neutralized => {
            b.pmos("MP1", NODE_SAOUT, "sae", SUPPLY, params.precharge);
            b.pmos("MP2", NODE_SAOUTB, "sae", SUPPLY, params.precharge);
            b.nmos("M9", NODE_BL, "saeb", NODE_REFL, params.equalizer);
            b.push(ElementLine::capacitor("Cbl", NODE_BL, "0", params.c_bl));
            b.push(ElementLine::capacitor(
                "Crefl",
                NODE_REFL,
                "0",
                params.c_refl,
            ));
            // transmission gates, open from SAE1
            b.pmos("MI1", NODE_SAOUT, "sae1", NODE_BL, params.isolation);
            b.nmos("MI1n", NODE_SAOUT, "sae1b", NODE_BL, params.isolation);
            b.pmos("MI2", NODE_SAOUTB, "sae1", NODE_REFL, params.isolation);
            b.nmos("MI2n", NODE_SAOUTB, "sae1b", NODE_REFL, params.isolation);
            b.column(
                "d",
                NODE_SAOUT,
                "dcl",
                NODE_GC,
                &data,
                params.access,
                params.clamp,
                params.mtj.tox0,
            );
            b.column(
                "r",
                NODE_SAOUTB,
                "rcl",
                NODE_GR,
                &refs,
                ref_access,
                params.clamp,
                params.mtj.tox0,
            );
            b.pmos("MLP1", NODE_SAOUT, NODE_SAOUTB, SUPPLY, params.latch_p);
            b.pmos("MLP2", NODE_SAOUTB, NODE_SAOUT, SUPPLY, params.latch_p);
            b.nmos("MLN1", NODE_SAOUT, NODE_SAOUTB, "tail", params.latch_n);
            b.nmos("MLN2", NODE_SAOUTB, NODE_SAOUT, "tail", params.latch_n);
            // the latch regenerates once the cells are connected
            b.nmos("MT", "tail", "sae1", "0", params.tail);
            if neutralized {
                let c = params.neutral_cap_value();
                b.push(ElementLine::capacitor("C1", NODE_SAOUT, NODE_GR, c));
                b.push(ElementLine::capacitor("C2", NODE_SAOUTB, NODE_GC, c));
            }
        }
    }
    b.push(ElementLine::capacitor(
        "Cout",
        NODE_SAOUT,
        "0",
        params.c_out,
    ));
    b.push(ElementLine::capacitor(
        "Coutb",
        NODE_SAOUTB,
        "0",
        params.c_out,
    ));

    let mut netlist = Netlist {
        title: format!(
            "{} read, {} data cell",
            DesignId { kind, reference },
            data_state
        ),
        elements: b.elements,
        ..Netlist::default()
    };
    let model = [
        ("vth0_n", params.nmos.vth0),
        ("vth0_p", params.pmos.vth0),
        ("kp_n", params.nmos.kprime),
        ("kp_p", params.pmos.kprime),
        ("lambda_n", params.nmos.lambda),
        ("lambda_p", params.pmos.lambda),
        ("cov", params.nmos.cox_overlap),
        ("mtj_ra", params.mtj.ra_p),
        ("mtj_tmr", params.mtj.tmr),
        ("mtj_beta", params.mtj.beta),
        ("mtj_jc0", params.mtj.jc0),
        ("mtj_tox0", params.mtj.tox0),
    ];
    for (k, v) in model {
        netlist.params.insert(k.to_string(), v);
    }
    let stop = 2.0 * timing.wl_fall;
    netlist
        .analyses
        .push(crate::netlist::AnalysisDirective::Tran { step: 1e-12, stop });
    Ok(netlist)
}
