#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstdint>
#include <string>
#include <vector>

#include "fjsec/channel.hpp"
#include "fjsec/complexlinalg.hpp"
#include "fjsec/conventional_fj.hpp"
#include "fjsec/harness.hpp"
#include "fjsec/mine.hpp"
#include "fjsec/neuralnet.hpp"
#include "fjsec/rng.hpp"

namespace py = pybind11;
using namespace fjsec;

PYBIND11_MODULE(_fjsec, m) {
  m.doc() =
      "MIMO wiretap-channel secrecy primitives: nullspace friendly jamming, "
      "water-filling, secrecy rates, Donsker-Varadhan mutual information, "
      "and the experiment runner. Rates are in nats unless a function says "
      "otherwise.";

  py::register_exception<NumericalError>(m, "NumericalError");
  py::register_exception<ConfigError>(m, "ConfigError");

  // ------------------------------------------------------------- random
  py::enum_<StreamKind>(m, "StreamKind")
      .value("Channel", StreamKind::Channel)
      .value("Eavesdropper", StreamKind::Eavesdropper)
      .value("CsiError", StreamKind::CsiError)
      .value("Noise", StreamKind::Noise)
      .value("Jamming", StreamKind::Jamming)
      .value("Message", StreamKind::Message)
      .value("Init", StreamKind::Init)
      .value("Shuffle", StreamKind::Shuffle)
      .value("Generic", StreamKind::Generic);

  py::class_<Rng>(m, "Rng",
                  "Deterministic random stream; equal (master, kind, index) "
                  "triples replay bit-identically across runs and languages.")
      .def(py::init<uint64_t>(), py::arg("seed"))
      .def_static("stream", &Rng::stream, py::arg("master"), py::arg("kind"),
                  py::arg("index") = 0)
      .def("uniform", &Rng::uniform)
      .def("gaussian", py::overload_cast<>(&Rng::gaussian))
      .def("cgaussian", &Rng::cgaussian, py::arg("var"))
      .def("integer", &Rng::integer, py::arg("n"));

  m.def("mix_seed", &mix_seed, py::arg("master"), py::arg("tag"),
        py::arg("index"));

  // ------------------------------------------------------ linear algebra
  m.def(
      "svd",
      [](const CMat& a) {
        const SvdResult r = svd(a);
        return py::make_tuple(r.u, r.sigma, r.v);
      },
      py::arg("a"),
      "Full SVD a = u @ diag(sigma) @ v.conj().T with square unitary u, v; "
      "sigma holds the min(m, n) singular values, descending.");
  m.def("nullspace_basis", &nullspace_basis, py::arg("a"),
        py::arg("tol") = 1e-10,
        "Orthonormal basis z of the right nullspace of a: a @ z ~ 0.");
  m.def("logdet_hpd", &logdet_hpd, py::arg("a"),
        "log det of a Hermitian positive definite matrix, via Cholesky.");
  m.def("realify", &realify, py::arg("a"),
        "Real embedding [[Re, -Im], [Im, Re]] (a ring homomorphism).");
  m.def("realify_rows", &realify_rows, py::arg("cols"));
  m.def("unrealify_rows", &unrealify_rows, py::arg("rows"));
  m.def("nats_to_bits", &nats_to_bits, py::arg("nats"));

  // ------------------------------------------------------------- channel
  py::enum_<CsiMode>(m, "CsiMode")
      .value("Perfect", CsiMode::Perfect)
      .value("Statistical", CsiMode::Statistical)
      .value("Unknown", CsiMode::Unknown);

  py::class_<ChannelDraw>(m, "ChannelDraw",
                          "One wiretap realization: y = h^H x + n_b at the "
                          "receiver, z = g^H x + n_e at the eavesdropper.")
      .def(py::init<>())
      .def_readwrite("h", &ChannelDraw::h)
      .def_readwrite("g", &ChannelDraw::g)
      .def_readwrite("sigma_b2", &ChannelDraw::sigma_b2)
      .def_readwrite("sigma_e2", &ChannelDraw::sigma_e2);

  py::class_<CsiState>(m, "CsiState",
                       "Transmitter-side channel knowledge; statistical mode "
                       "carries the noisy estimate h_hat = h + dh.")
      .def(py::init<>())
      .def_readwrite("mode", &CsiState::mode)
      .def_readwrite("rho_e2", &CsiState::rho_e2)
      .def_readwrite("h_hat", &CsiState::h_hat);

  m.def("sample_channel", &sample_channel, py::arg("rows"), py::arg("cols"),
        py::arg("rng"), py::arg("entry_var") = 1.0,
        "i.i.d. Rayleigh matrix with CN(0, entry_var) entries.");
  m.def("sample_draw", &sample_draw, py::arg("n_t"), py::arg("n_r"),
        py::arg("n_e"), py::arg("sigma_b2"), py::arg("sigma_e2"),
        py::arg("rng"));
  m.def("make_csi", &make_csi, py::arg("draw"), py::arg("mode"),
        py::arg("rho_e2"), py::arg("rng"));
  m.def("transmit", &transmit, py::arg("h"), py::arg("x"), py::arg("sigma2"),
        py::arg("rng"), "y = h^H x + n with n ~ CN(0, sigma2 I).");

  // -------------------------------------------- friendly-jamming design
  py::class_<FjDesign>(m, "FjDesign",
                       "Nullspace jamming design: w = z v vanishes at a "
                       "receiver whose channel matches the design channel; "
                       "n_fj == 0 means there is no nullspace to jam into.")
      .def_readonly("z", &FjDesign::z)
      .def_readonly("sigma_v2", &FjDesign::sigma_v2)
      .def_readonly("n_fj", &FjDesign::n_fj);

  m.def("design_fj", &design_fj, py::arg("h_design"), py::arg("sigma_v2"),
        py::arg("tol") = 1e-10);
  m.def("sample_fj", &sample_fj, py::arg("design"), py::arg("rng"));
  m.def("eve_noise_cov", &eve_noise_cov, py::arg("g"), py::arg("design"),
        py::arg("sigma_e2"));

  py::class_<PowerAllocation>(m, "PowerAllocation")
      .def_readonly("per_stream", &PowerAllocation::per_stream)
      .def_readonly("p_info", &PowerAllocation::p_info)
      .def_readonly("p_total", &PowerAllocation::p_total);

  m.def("waterfill", &waterfill, py::arg("gains"), py::arg("p_info"),
        "Water-filling over parallel streams with the given squared-singular-"
        "value gains (descending).");

  // ------------------------------------------------------- secrecy rates
  py::class_<SecrecySample>(m, "SecrecySample")
      .def_readonly("r_ab", &SecrecySample::r_ab)
      .def_readonly("r_ae", &SecrecySample::r_ae)
      .def_readonly("r_s", &SecrecySample::r_s);

  m.def("secrecy_rate_perfect", &secrecy_rate_perfect, py::arg("draw"),
        py::arg("alloc"), py::arg("design"));
  m.def("secrecy_rate_imcsi", &secrecy_rate_imcsi, py::arg("draw"),
        py::arg("csi"), py::arg("alloc"), py::arg("design"),
        "Imperfect-CSI rate: the design is built from csi.h_hat, so jamming "
        "leaks into the legitimate link through the estimation error.");

  py::class_<GscResult>(m, "GscResult")
      .def_readonly("value", &GscResult::value)
      .def_readonly("used_pseudo_det", &GscResult::used_pseudo_det);

  m.def("gsc", &gsc, py::arg("i_ab"), py::arg("g"), py::arg("design"),
        py::arg("q_s"),
        "Guaranteed secrecy against a noise-free eavesdropper.");

  py::class_<PowerSplitResult>(m, "PowerSplitResult")
      .def_readonly("phi_star", &PowerSplitResult::phi_star)
      .def_readonly("mean_rs", &PowerSplitResult::mean_rs);

  m.def("split_secrecy", &split_secrecy, py::arg("draw"), py::arg("csi"),
        py::arg("phi"), py::arg("p_total"), py::arg("tol") = 1e-10,
        "Per-draw secrecy with p_info = phi p_total and the rest jammed "
        "into the design nullspace.");
  m.def("exhaustive_power_split", &exhaustive_power_split, py::arg("draws"),
        py::arg("csi"), py::arg("p_total"), py::arg("grid_steps") = 101,
        py::arg("workers") = 1,
        py::call_guard<py::gil_scoped_release>());

  // -------------------------------------------------- mutual information
  m.def("gaussian_mi_oracle", &gaussian_mi_oracle, py::arg("rho"),
        "MI of a jointly Gaussian scalar pair: -1/2 log(1 - rho^2).");
  m.def(
      "estimate_mi",
      [](const RMat& xs, const RMat& ys, int hidden, int steps, int batch,
         uint64_t seed, double lr) {
        py::gil_scoped_release release;
        Rng init = Rng::stream(seed, StreamKind::Init, 0);
        Rng batches = Rng::stream(seed, StreamKind::Shuffle, 0);
        MineEstimator est(static_cast<int>(xs.cols()),
                          static_cast<int>(ys.cols()), hidden, init);
        AdamConfig cfg;
        cfg.lr = lr;
        return fit_estimator(est, xs, ys, steps, batch, batches, cfg).value;
      },
      py::arg("xs"), py::arg("ys"), py::arg("hidden") = 100,
      py::arg("steps") = 500, py::arg("batch") = 256, py::arg("seed") = 1,
      py::arg("lr") = 1e-3,
      "Train a fresh statistic network on aligned sample rows and return "
      "the Donsker-Varadhan lower-bound estimate (nats).");

  // ----------------------------------------------------------- deployment
  m.def(
      "published_flops",
      []() {
        const FlopsReport r = flops(published_flops_stack());
        py::list layers;
        for (const auto& row : r.rows)
          layers.append(py::make_tuple(row.in, row.out, row.text, row.table));
        py::dict d;
        d["layers"] = layers;
        d["total_text"] = r.total_text;
        d["total_table"] = r.total_table;
        return d;
      },
      "FLOP count of the deployment dense stack, under the exact "
      "multiply-add formula and the doubled-product table convention.");

  // ------------------------------------------------------------- harness
  m.def("schema_example", &schema_example,
        "A fully populated example run config (JSON text).");
  m.def(
      "run_experiment",
      [](const std::string& config_json, const std::string& out_dir,
         int workers) {
        ExperimentConfig cfg = parse_run_config(config_json);
        py::gil_scoped_release release;
        run_experiment(cfg, out_dir, workers);
      },
      py::arg("config_json"), py::arg("out_dir"), py::arg("workers") = 1,
      "Parse a run config and execute it; writes results.csv, manifest.json "
      "and (for training experiments) history.csv under out_dir.");
  m.def(
      "compare_schemes",
      [](const std::string& config_json, const std::string& out_dir,
         int workers) {
        ExperimentConfig cfg = parse_compare_config(config_json);
        py::gil_scoped_release release;
        compare_schemes(cfg, out_dir, workers);
      },
      py::arg("config_json"), py::arg("out_dir"), py::arg("workers") = 1,
      "Parse a compare config (scheme list) and evaluate every scheme on "
      "the same draws per grid point.");
  m.def("file_digest_hex", &file_digest_hex, py::arg("path"),
        "FNV-1a 64-bit digest of a file's bytes, as 16 hex digits.");
}
