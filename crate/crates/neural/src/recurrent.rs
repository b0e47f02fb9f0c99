//! GRU, LSTM, and plain tanh recurrences with hand-derived backward passes.
//!
//! Every cell keeps two bias vectors per gate, one tied to the input
//! projection and one to the recurrent projection. For the GRU the recurrent
//! candidate bias sits inside the reset product:
//!
//!   z = sig(x Wz + bxz + h Uz + bhz)
//!   r = sig(x Wr + bxr + h Ur + bhr)
//!   s = h Uh + bhh
//!   c = tanh(x Wh + bxh + r .* s)
//!   h' = (1 - z) .* h + z .* c
//!
//! so the update gate steers toward the candidate, not away from it. Input
//! projections for a whole sequence are batched into one matmul per gate;
//! only the h-dependent terms run step by step. Backward passes store the
//! per-step pre-activation gradients and recover all weight gradients with
//! whole-sequence matmuls at the end.

use serde::{Deserialize, Serialize};

use crate::linalg::{add_row_broadcast, col_sums, matmul_nn, matmul_nt, matmul_tn};
use crate::params::ParameterSet;
use crate::tensor::Tensor;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CellKind {
    Gru,
    Lstm,
    Rnn,
}

impl CellKind {
    /// Gate suffixes in canonical order; the empty suffix means unsuffixed
    /// names (the plain RNN has a single implicit gate).
    pub(crate) fn gates(self) -> &'static [&'static str] {
        match self {
            CellKind::Gru => &["z", "r", "h"],
            CellKind::Lstm => &["i", "f", "g", "o"],
            CellKind::Rnn => &[""],
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            CellKind::Gru => "gru",
            CellKind::Lstm => "lstm",
            CellKind::Rnn => "rnn",
        }
    }
}

pub(crate) fn gate_name(base: &str, gate: &str) -> String {
    if gate.is_empty() {
        base.to_string()
    } else {
        format!("{base}_{gate}")
    }
}

pub(crate) fn sigmoid_inplace(x: &mut [f64]) {
    for v in x {
        *v = 1.0 / (1.0 + (-*v).exp());
    }
}

pub(crate) fn tanh_inplace(x: &mut [f64]) {
    for v in x {
        *v = v.tanh();
    }
}

/// Everything one direction of one recurrent layer needs for its backward
/// pass. All tensors are in internal time order: a reversed direction stores
/// its input and activations already flipped, and flips gradients back at
/// the boundary.
pub(crate) struct DirCache {
    reverse: bool,
    x: Tensor,
    hprev: Tensor,
    hout: Tensor,
    gates: GateCache,
}

enum GateCache {
    Gru {
        z: Tensor,
        r: Tensor,
        s: Tensor,
        c: Tensor,
    },
    Lstm {
        i: Tensor,
        f: Tensor,
        g: Tensor,
        o: Tensor,
        cprev: Tensor,
        ctanh: Tensor,
    },
    Rnn,
}

fn proj(params: &ParameterSet, prefix: &str, gate: &str, x: &Tensor, with_bh: bool) -> Tensor {
    let (k, b, _f) = (x.shape()[0], x.shape()[1], x.shape()[2]);
    let w = params.get(&format!("{prefix}{}", gate_name("w", gate)));
    let h = w.shape()[1];
    let mut out = Tensor::zeros(&[k, b, h]);
    matmul_nn(x.data(), w.data(), k * b, x.shape()[2], h, out.data_mut());
    add_row_broadcast(
        out.data_mut(),
        params.get(&format!("{prefix}{}", gate_name("bx", gate))).data(),
    );
    if with_bh {
        add_row_broadcast(
            out.data_mut(),
            params.get(&format!("{prefix}{}", gate_name("bh", gate))).data(),
        );
    }
    out
}

pub(crate) fn direction_forward(
    cell: CellKind,
    params: &ParameterSet,
    prefix: &str,
    x_ext: &Tensor,
    reverse: bool,
) -> (Tensor, DirCache) {
    let x = if reverse {
        x_ext.reverse_time()
    } else {
        x_ext.clone()
    };
    let (k, b) = (x.shape()[0], x.shape()[1]);
    let hdim = params
        .get(&format!("{prefix}{}", gate_name("w", cell.gates()[0])))
        .shape()[1];
    let bh = b * hdim;
    let mut hprev = Tensor::zeros(&[k, b, hdim]);
    let mut hout = Tensor::zeros(&[k, b, hdim]);
    let mut hcur = vec![0.0; bh];

    let gates = match cell {
        CellKind::Gru => {
            let mut z = proj(params, prefix, "z", &x, true);
            let mut r = proj(params, prefix, "r", &x, true);
            let mut c = proj(params, prefix, "h", &x, false);
            let mut s = Tensor::zeros(&[k, b, hdim]);
            add_row_broadcast(s.data_mut(), params.get(&format!("{prefix}bh_h")).data());
            let uz = params.get(&format!("{prefix}u_z")).data();
            let ur = params.get(&format!("{prefix}u_r")).data();
            let uh = params.get(&format!("{prefix}u_h")).data();
            for t in 0..k {
                matmul_nn(&hcur, uz, b, hdim, hdim, z.step_mut(t));
                sigmoid_inplace(z.step_mut(t));
                matmul_nn(&hcur, ur, b, hdim, hdim, r.step_mut(t));
                sigmoid_inplace(r.step_mut(t));
                matmul_nn(&hcur, uh, b, hdim, hdim, s.step_mut(t));
                {
                    let rs = r.step(t);
                    let ss = s.step(t);
                    let cs = c.step_mut(t);
                    for i in 0..bh {
                        cs[i] = (cs[i] + rs[i] * ss[i]).tanh();
                    }
                }
                hprev.step_mut(t).copy_from_slice(&hcur);
                {
                    let zs = z.step(t);
                    let cs = c.step(t);
                    let ho = hout.step_mut(t);
                    for i in 0..bh {
                        ho[i] = (1.0 - zs[i]) * hcur[i] + zs[i] * cs[i];
                    }
                }
                hcur.copy_from_slice(hout.step(t));
            }
            GateCache::Gru { z, r, s, c }
        }
        CellKind::Lstm => {
            let mut ig = proj(params, prefix, "i", &x, true);
            let mut fg = proj(params, prefix, "f", &x, true);
            let mut gg = proj(params, prefix, "g", &x, true);
            let mut og = proj(params, prefix, "o", &x, true);
            let mut cprev = Tensor::zeros(&[k, b, hdim]);
            let mut ctanh = Tensor::zeros(&[k, b, hdim]);
            let ui = params.get(&format!("{prefix}u_i")).data();
            let uf = params.get(&format!("{prefix}u_f")).data();
            let ug = params.get(&format!("{prefix}u_g")).data();
            let uo = params.get(&format!("{prefix}u_o")).data();
            let mut ccur = vec![0.0; bh];
            for t in 0..k {
                matmul_nn(&hcur, ui, b, hdim, hdim, ig.step_mut(t));
                sigmoid_inplace(ig.step_mut(t));
                matmul_nn(&hcur, uf, b, hdim, hdim, fg.step_mut(t));
                sigmoid_inplace(fg.step_mut(t));
                matmul_nn(&hcur, ug, b, hdim, hdim, gg.step_mut(t));
                tanh_inplace(gg.step_mut(t));
                matmul_nn(&hcur, uo, b, hdim, hdim, og.step_mut(t));
                sigmoid_inplace(og.step_mut(t));
                cprev.step_mut(t).copy_from_slice(&ccur);
                hprev.step_mut(t).copy_from_slice(&hcur);
                {
                    let is = ig.step(t);
                    let fs = fg.step(t);
                    let gs = gg.step(t);
                    let os = og.step(t);
                    let cts = ctanh.step_mut(t);
                    let ho = hout.step_mut(t);
                    for i in 0..bh {
                        ccur[i] = fs[i] * ccur[i] + is[i] * gs[i];
                        cts[i] = ccur[i].tanh();
                        ho[i] = os[i] * cts[i];
                    }
                }
                hcur.copy_from_slice(hout.step(t));
            }
            GateCache::Lstm {
                i: ig,
                f: fg,
                g: gg,
                o: og,
                cprev,
                ctanh,
            }
        }
        CellKind::Rnn => {
            let mut a = proj(params, prefix, "", &x, true);
            let u = params.get(&format!("{prefix}u")).data();
            for t in 0..k {
                matmul_nn(&hcur, u, b, hdim, hdim, a.step_mut(t));
                tanh_inplace(a.step_mut(t));
                hprev.step_mut(t).copy_from_slice(&hcur);
                hcur.copy_from_slice(a.step(t));
                hout.step_mut(t).copy_from_slice(&hcur);
            }
            GateCache::Rnn
        }
    };

    let out_ext = if reverse {
        hout.reverse_time()
    } else {
        hout.clone()
    };
    (
        out_ext,
        DirCache {
            reverse,
            x,
            hprev,
            hout,
            gates,
        },
    )
}

pub(crate) fn direction_backward(
    params: &ParameterSet,
    prefix: &str,
    cache: &DirCache,
    dh_ext: &Tensor,
    grads: &mut ParameterSet,
) -> Tensor {
    let dh = if cache.reverse {
        dh_ext.reverse_time()
    } else {
        dh_ext.clone()
    };
    let (k, b, hdim) = (
        cache.x.shape()[0],
        cache.x.shape()[1],
        cache.hout.shape()[2],
    );
    let f = cache.x.shape()[2];
    let rows = k * b;
    let bh = b * hdim;
    let mut dhc = vec![0.0; bh];
    let mut dx = Tensor::zeros(&[k, b, f]);

    match &cache.gates {
        GateCache::Gru { z, r, s, c } => {
            let uz = params.get(&format!("{prefix}u_z")).data();
            let ur = params.get(&format!("{prefix}u_r")).data();
            let uh = params.get(&format!("{prefix}u_h")).data();
            let mut daz = Tensor::zeros(&[k, b, hdim]);
            let mut dar = Tensor::zeros(&[k, b, hdim]);
            let mut dac = Tensor::zeros(&[k, b, hdim]);
            let mut dsg = Tensor::zeros(&[k, b, hdim]);
            for t in (0..k).rev() {
                {
                    let zs = z.step(t);
                    let rs = r.step(t);
                    let ss = s.step(t);
                    let cs = c.step(t);
                    let hp = cache.hprev.step(t);
                    let dho = dh.step(t);
                    let dazs = daz.step_mut(t);
                    let dars = dar.step_mut(t);
                    let dacs = dac.step_mut(t);
                    let dss = dsg.step_mut(t);
                    for i in 0..bh {
                        let dtot = dho[i] + dhc[i];
                        let dz = dtot * (cs[i] - hp[i]);
                        dazs[i] = dz * zs[i] * (1.0 - zs[i]);
                        let da = dtot * zs[i] * (1.0 - cs[i] * cs[i]);
                        dacs[i] = da;
                        dars[i] = da * ss[i] * rs[i] * (1.0 - rs[i]);
                        dss[i] = da * rs[i];
                        dhc[i] = dtot * (1.0 - zs[i]);
                    }
                }
                matmul_nt(daz.step(t), uz, b, hdim, hdim, &mut dhc);
                matmul_nt(dar.step(t), ur, b, hdim, hdim, &mut dhc);
                matmul_nt(dsg.step(t), uh, b, hdim, hdim, &mut dhc);
            }
            for (pre, g) in [(&daz, "z"), (&dar, "r")] {
                matmul_tn(
                    cache.x.data(),
                    pre.data(),
                    f,
                    rows,
                    hdim,
                    grads.get_mut(&format!("{prefix}w_{g}")).data_mut(),
                );
                matmul_tn(
                    cache.hprev.data(),
                    pre.data(),
                    hdim,
                    rows,
                    hdim,
                    grads.get_mut(&format!("{prefix}u_{g}")).data_mut(),
                );
                col_sums(
                    pre.data(),
                    hdim,
                    grads.get_mut(&format!("{prefix}bx_{g}")).data_mut(),
                );
                col_sums(
                    pre.data(),
                    hdim,
                    grads.get_mut(&format!("{prefix}bh_{g}")).data_mut(),
                );
            }
            matmul_tn(
                cache.x.data(),
                dac.data(),
                f,
                rows,
                hdim,
                grads.get_mut(&format!("{prefix}w_h")).data_mut(),
            );
            col_sums(
                dac.data(),
                hdim,
                grads.get_mut(&format!("{prefix}bx_h")).data_mut(),
            );
            matmul_tn(
                cache.hprev.data(),
                dsg.data(),
                hdim,
                rows,
                hdim,
                grads.get_mut(&format!("{prefix}u_h")).data_mut(),
            );
            col_sums(
                dsg.data(),
                hdim,
                grads.get_mut(&format!("{prefix}bh_h")).data_mut(),
            );
            let wz = params.get(&format!("{prefix}w_z")).data();
            let wr = params.get(&format!("{prefix}w_r")).data();
            let wh = params.get(&format!("{prefix}w_h")).data();
            matmul_nt(daz.data(), wz, rows, hdim, f, dx.data_mut());
            matmul_nt(dar.data(), wr, rows, hdim, f, dx.data_mut());
            matmul_nt(dac.data(), wh, rows, hdim, f, dx.data_mut());
        }
        GateCache::Lstm {
            i,
            f: fg,
            g,
            o,
            cprev,
            ctanh,
        } => {
            let mut dai = Tensor::zeros(&[k, b, hdim]);
            let mut daf = Tensor::zeros(&[k, b, hdim]);
            let mut dag = Tensor::zeros(&[k, b, hdim]);
            let mut dao = Tensor::zeros(&[k, b, hdim]);
            let mut dcc = vec![0.0; bh];
            for t in (0..k).rev() {
                {
                    let is = i.step(t);
                    let fs = fg.step(t);
                    let gs = g.step(t);
                    let os = o.step(t);
                    let cps = cprev.step(t);
                    let cts = ctanh.step(t);
                    let dho = dh.step(t);
                    let dais = dai.step_mut(t);
                    let dafs = daf.step_mut(t);
                    let dags = dag.step_mut(t);
                    let daos = dao.step_mut(t);
                    for idx in 0..bh {
                        let dtot = dho[idx] + dhc[idx];
                        let dov = dtot * cts[idx];
                        daos[idx] = dov * os[idx] * (1.0 - os[idx]);
                        let dcall = dcc[idx] + dtot * os[idx] * (1.0 - cts[idx] * cts[idx]);
                        dais[idx] = dcall * gs[idx] * is[idx] * (1.0 - is[idx]);
                        dafs[idx] = dcall * cps[idx] * fs[idx] * (1.0 - fs[idx]);
                        dags[idx] = dcall * is[idx] * (1.0 - gs[idx] * gs[idx]);
                        dcc[idx] = dcall * fs[idx];
                        dhc[idx] = 0.0;
                    }
                }
                for (pre, gname) in [(&dai, "i"), (&daf, "f"), (&dag, "g"), (&dao, "o")] {
                    let u = params.get(&format!("{prefix}u_{gname}")).data();
                    matmul_nt(pre.step(t), u, b, hdim, hdim, &mut dhc);
                }
            }
            for (pre, gname) in [(&dai, "i"), (&daf, "f"), (&dag, "g"), (&dao, "o")] {
                matmul_tn(
                    cache.x.data(),
                    pre.data(),
                    f,
                    rows,
                    hdim,
                    grads.get_mut(&format!("{prefix}w_{gname}")).data_mut(),
                );
                matmul_tn(
                    cache.hprev.data(),
                    pre.data(),
                    hdim,
                    rows,
                    hdim,
                    grads.get_mut(&format!("{prefix}u_{gname}")).data_mut(),
                );
                col_sums(
                    pre.data(),
                    hdim,
                    grads.get_mut(&format!("{prefix}bx_{gname}")).data_mut(),
                );
                col_sums(
                    pre.data(),
                    hdim,
                    grads.get_mut(&format!("{prefix}bh_{gname}")).data_mut(),
                );
                let w = params.get(&format!("{prefix}w_{gname}")).data();
                matmul_nt(pre.data(), w, rows, hdim, f, dx.data_mut());
            }
        }
        GateCache::Rnn => {
            let u = params.get(&format!("{prefix}u")).data();
            let mut da = Tensor::zeros(&[k, b, hdim]);
            for t in (0..k).rev() {
                {
                    let ho = cache.hout.step(t);
                    let dho = dh.step(t);
                    let das = da.step_mut(t);
                    for i in 0..bh {
                        let dtot = dho[i] + dhc[i];
                        das[i] = dtot * (1.0 - ho[i] * ho[i]);
                        dhc[i] = 0.0;
                    }
                }
                matmul_nt(da.step(t), u, b, hdim, hdim, &mut dhc);
            }
            matmul_tn(
                cache.x.data(),
                da.data(),
                f,
                rows,
                hdim,
                grads.get_mut(&format!("{prefix}w")).data_mut(),
            );
            matmul_tn(
                cache.hprev.data(),
                da.data(),
                hdim,
                rows,
                hdim,
                grads.get_mut(&format!("{prefix}u")).data_mut(),
            );
            col_sums(da.data(), hdim, grads.get_mut(&format!("{prefix}bx")).data_mut());
            col_sums(da.data(), hdim, grads.get_mut(&format!("{prefix}bh")).data_mut());
            let w = params.get(&format!("{prefix}w")).data();
            matmul_nt(da.data(), w, rows, hdim, f, dx.data_mut());
        }
    }

    if cache.reverse {
        dx.reverse_time()
    } else {
        dx
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar_params(prefix: &str, vals: &[(&str, f64)]) -> ParameterSet {
        let mut ps = ParameterSet::new();
        for (name, v) in vals {
            let shape: &[usize] = if name.starts_with('w') || name.starts_with('u') {
                &[1, 1]
            } else {
                &[1]
            };
            ps.push(
                &format!("{prefix}{name}"),
                Tensor::from_vec(shape, vec![*v]).unwrap(),
                true,
            );
        }
        ps
    }

    #[test]
    fn scalar_gru_two_steps() {
        // z1 = sig(0.5 + 0.1 - 0.1) = sig(0.5), r1 = sig(-0.3 + 0.05),
        // s1 = 0.1, c1 = tanh(1.0 + r1*0.1), h1 = z1*c1, then fed back.
        let ps = scalar_params(
            "t.",
            &[
                ("w_z", 0.5), ("u_z", 0.25), ("bx_z", 0.1), ("bh_z", -0.1),
                ("w_r", -0.3), ("u_r", 0.2), ("bx_r", 0.0), ("bh_r", 0.05),
                ("w_h", 0.8), ("u_h", -0.5), ("bx_h", 0.2), ("bh_h", 0.1),
            ],
        );
        let x = Tensor::from_vec(&[2, 1, 1], vec![1.0, -0.5]).unwrap();
        let (out, _) = direction_forward(CellKind::Gru, &ps, "t.", &x, false);
        assert!((out.data()[0] - 0.48513066703588303).abs() < 1e-14);
        assert!((out.data()[1] - 0.12969669691180594).abs() < 1e-14);
    }

    #[test]
    fn gru_with_only_candidate_weight_halves_history() {
        // Every zeroed gate sits at sig(0) = 1/2, and the candidate reduces
        // to tanh(x), so h' = (h + tanh(x)) / 2. For x = [2, 0]:
        // h1 = tanh(2)/2, h2 = tanh(2)/4.
        let ps = scalar_params(
            "t.",
            &[
                ("w_z", 0.0), ("u_z", 0.0), ("bx_z", 0.0), ("bh_z", 0.0),
                ("w_r", 0.0), ("u_r", 0.0), ("bx_r", 0.0), ("bh_r", 0.0),
                ("w_h", 1.0), ("u_h", 0.0), ("bx_h", 0.0), ("bh_h", 0.0),
            ],
        );
        let x = Tensor::from_vec(&[2, 1, 1], vec![2.0, 0.0]).unwrap();
        let (out, _) = direction_forward(CellKind::Gru, &ps, "t.", &x, false);
        assert!((out.data()[0] - 0.48201379003790845).abs() < 1e-14);
        assert!((out.data()[1] - 0.24100689501895423).abs() < 1e-14);
    }

    #[test]
    fn scalar_lstm_two_steps() {
        // c1 = sig(0.4+0.1)*tanh(0.7-0.1+0.1)... worked through by hand once,
        // then frozen. Sign flips on the second step because x = -1 drives
        // the output gate below half and the candidate negative.
        let ps = scalar_params(
            "t.",
            &[
                ("w_i", 0.4), ("u_i", 0.1), ("bx_i", 0.05), ("bh_i", 0.05),
                ("w_f", 0.3), ("u_f", -0.2), ("bx_f", 0.1), ("bh_f", 0.0),
                ("w_g", 0.7), ("u_g", 0.3), ("bx_g", -0.1), ("bh_g", 0.1),
                ("w_o", -0.4), ("u_o", 0.2), ("bx_o", 0.0), ("bh_o", 0.2),
            ],
        );
        let x = Tensor::from_vec(&[2, 1, 1], vec![1.0, -1.0]).unwrap();
        let (out, _) = direction_forward(CellKind::Lstm, &ps, "t.", &x, false);
        assert!((out.data()[0] - 0.16178873168294219).abs() < 1e-14);
        assert!((out.data()[1] - -0.051886002396691937).abs() < 1e-14);
    }

    #[test]
    fn scalar_rnn_two_steps() {
        // h1 = tanh(0.5 + 0.2) = tanh(0.7), h2 = tanh(-0.25 - 0.3*h1 + 0.2).
        let ps = scalar_params("t.", &[("w", 0.5), ("u", -0.3), ("bx", 0.1), ("bh", 0.1)]);
        let x = Tensor::from_vec(&[2, 1, 1], vec![1.0, -0.5]).unwrap();
        let (out, _) = direction_forward(CellKind::Rnn, &ps, "t.", &x, false);
        assert!((out.data()[0] - 0.60436777711716361).abs() < 1e-14);
        assert!((out.data()[1] - -0.22727137318539012).abs() < 1e-14);
    }

    #[test]
    fn reversed_direction_mirrors_reversed_input() {
        let ps = scalar_params("t.", &[("w", 0.5), ("u", -0.3), ("bx", 0.1), ("bh", 0.1)]);
        let x = Tensor::from_vec(&[4, 1, 1], vec![1.0, -0.5, 0.25, 2.0]).unwrap();
        let (fwd_on_flipped, _) =
            direction_forward(CellKind::Rnn, &ps, "t.", &x.reverse_time(), false);
        let (bwd, _) = direction_forward(CellKind::Rnn, &ps, "t.", &x, true);
        assert_eq!(bwd, fwd_on_flipped.reverse_time());
    }

    #[test]
    fn zero_parameters_keep_lstm_and_rnn_silent() {
        for cell in [CellKind::Lstm, CellKind::Rnn] {
            let mut ps = ParameterSet::new();
            for g in cell.gates() {
                for base in ["w", "u"] {
                    ps.push(
                        &format!("t.{}", gate_name(base, g)),
                        Tensor::zeros(&[1, 1]),
                        true,
                    );
                }
                for base in ["bx", "bh"] {
                    ps.push(&format!("t.{}", gate_name(base, g)), Tensor::zeros(&[1]), true);
                }
            }
            let x = Tensor::from_vec(&[3, 1, 1], vec![1.0, -1.0, 2.0]).unwrap();
            let (out, _) = direction_forward(cell, &ps, "t.", &x, false);
            assert!(out.data().iter().all(|&v| v == 0.0), "{:?}", cell);
        }
    }
}
