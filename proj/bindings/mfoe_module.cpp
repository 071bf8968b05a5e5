#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "mfoe/analysis.hpp"
#include "mfoe/errors.hpp"
#include "mfoe/calibrate.hpp"
#include "mfoe/experiment.hpp"
#include "mfoe/io.hpp"
#include "mfoe/metrics.hpp"
#include "mfoe/operators.hpp"
#include "mfoe/potentials.hpp"
#include "mfoe/projections.hpp"
#include "mfoe/regularizer.hpp"
#include "mfoe/solver.hpp"

namespace py = pybind11;
using namespace mfoe;

namespace {

Image to_image(const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
    if (a.ndim() != 2) throw std::domain_error("expected a 2-D array");
    Image img(static_cast<int>(a.shape(0)), static_cast<int>(a.shape(1)));
    std::copy(a.data(), a.data() + a.size(), img.data.begin());
    return img;
}

py::array_t<double> from_image(const Image& img) {
    py::array_t<double> a({img.rows, img.cols});
    std::copy(img.data.begin(), img.data.end(), a.mutable_data());
    return a;
}

std::vector<double> to_vec(const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
    if (a.ndim() != 1) throw std::domain_error("expected a 1-D array");
    return std::vector<double>(a.data(), a.data() + a.size());
}

py::array_t<double> from_vec(const std::vector<double>& v) {
    py::array_t<double> a(static_cast<py::ssize_t>(v.size()));
    std::copy(v.begin(), v.end(), a.mutable_data());
    return a;
}

Eigen::MatrixXd to_matrix(const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
    if (a.ndim() != 2 || a.shape(0) != a.shape(1))
        throw std::domain_error("expected a square 2-D array");
    const int d = static_cast<int>(a.shape(0));
    Eigen::MatrixXd Q(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) Q(i, j) = a.data()[i * d + j];
    return Q;
}

py::dict report_dict(const SolveReport& r) {
    py::dict d;
    d["iterations"] = r.iterations;
    d["restarts"] = r.restarts;
    d["final_relative_change"] = r.final_relative_change;
    d["objective_trace"] = from_vec(r.objective_trace);
    return d;
}

SolveConfig solve_config(double tolerance, int max_iterations, double step) {
    return {tolerance, max_iterations, step};
}

} // namespace

PYBIND11_MODULE(mfoe, m) {
    m.doc() = "Variational image reconstruction with a multivariate fields-of-experts "
              "regularizer: Moreau-envelope potentials over a constrained convolutional "
              "filter bank, an accelerated restarted solver, and forward operators for "
              "denoising, deblurring, CS-MRI, and CT.";

    py::register_exception<ConfigError>(m, "ConfigError");
    py::register_exception<NumericError>(m, "NumericError");

    m.def(
        "project_l1_ball",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& x,
           double radius) { return from_vec(project_l1_ball(to_vec(x), radius)); },
        py::arg("x"), py::arg("radius") = 1.0,
        "Least-squares projection onto the l1 ball.");
    m.def(
        "project_l2_ball",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& x,
           double radius) { return from_vec(project_l2_ball(to_vec(x), radius)); },
        py::arg("x"), py::arg("radius") = 1.0);

    m.def(
        "moreau_linf",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& x, double mu) {
            const auto r = moreau_linf(to_vec(x), mu);
            return py::make_tuple(r.value, from_vec(r.grad));
        },
        py::arg("x"), py::arg("mu"),
        "Moreau envelope of the l-inf norm: returns (value, gradient).");
    m.def(
        "moreau_l2",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& x, double mu) {
            const auto r = moreau_l2(to_vec(x), mu);
            return py::make_tuple(r.value, from_vec(r.grad));
        },
        py::arg("x"), py::arg("mu"));

    m.def(
        "wcrr_univariate",
        [](double t, double mu, double nu, double lambda) {
            const auto r = wcrr_univariate(t, mu, nu, lambda);
            return py::make_tuple(r.value, r.derivative);
        },
        py::arg("t"), py::arg("mu"), py::arg("nu"), py::arg("lambda_"));

    py::class_<PotentialGroup>(m, "PotentialGroup")
        .def(py::init([](const py::array_t<double, py::array::c_style | py::array::forcecast>& Q,
                         double tau, double mu, const std::string& kind) {
                 return PotentialGroup(to_matrix(Q), tau, mu, norm_kind_from_string(kind));
             }),
             py::arg("Q"), py::arg("tau"), py::arg("mu"), py::arg("norm_kind") = "linf")
        .def_property_readonly("d", &PotentialGroup::dim)
        .def_property_readonly("tau", &PotentialGroup::tau)
        .def_property_readonly("mu", &PotentialGroup::mu)
        .def_property_readonly("norm_kind",
                               [](const PotentialGroup& g) { return to_string(g.kind()); })
        .def_property_readonly("q_spectral_norm", &PotentialGroup::q_spectral_norm)
        .def("psi",
             [](const PotentialGroup& g,
                const py::array_t<double, py::array::c_style | py::array::forcecast>& x) {
                 const auto r = psi_eval(g, to_vec(x));
                 return py::make_tuple(r.value, from_vec(r.grad));
             },
             py::arg("x"), "Expert potential value and gradient.");

    m.def(
        "enforce_group_constraints",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& Q, double tau,
           double mu, const std::string& kind) {
            return enforce_group_constraints(to_matrix(Q), tau, mu,
                                             norm_kind_from_string(kind));
        },
        py::arg("Q"), py::arg("tau"), py::arg("mu"), py::arg("norm_kind") = "linf",
        "Repair raw parameters onto the feasible set.");

    py::class_<MfoeModel>(m, "MfoeModel")
        .def_property_readonly("K", &MfoeModel::K)
        .def_property_readonly("d", &MfoeModel::d)
        .def_property_readonly("lambda_default", &MfoeModel::lambda_default)
        .def_property_readonly("norm_kind",
                               [](const MfoeModel& m_) { return to_string(m_.norm_kind()); })
        .def("mu_for_sigma",
             [](const MfoeModel& m_, double sigma) { return from_vec(m_.mu_for_sigma(sigma)); },
             py::arg("sigma"))
        .def("value_grad",
             [](const MfoeModel& m_,
                const py::array_t<double, py::array::c_style | py::array::forcecast>& x,
                double sigma) {
                 Image grad;
                 const double v = m_.value_grad(to_image(x), sigma, grad);
                 return py::make_tuple(v, from_image(grad));
             },
             py::arg("x"), py::arg("sigma"),
             "Regularizer value and gradient in one pass.");

    m.def("load_model", &load_model, py::arg("path"), py::arg("repair") = false);
    m.def("save_model", &save_model, py::arg("model"), py::arg("path"));
    m.def(
        "make_random_model",
        [](int K, int d, const std::string& kind, std::uint64_t seed) {
            return make_random_model(K, d, norm_kind_from_string(kind), seed);
        },
        py::arg("K") = 15, py::arg("d") = 4, py::arg("norm_kind") = "linf",
        py::arg("seed") = 1);
    m.def("make_huber_tv_model", &make_huber_tv_model, py::arg("mu"), py::arg("norm_size") = 40,
          "Smoothed isotropic TV as a single-group l2 model.");

    m.def(
        "denoise",
        [](const MfoeModel& model,
           const py::array_t<double, py::array::c_style | py::array::forcecast>& y,
           double lambda, double sigma, double tolerance, int max_iterations, double step) {
            auto [x, report] = denoise(model, to_image(y), lambda, sigma,
                                       solve_config(tolerance, max_iterations, step));
            return py::make_tuple(from_image(x), report_dict(report));
        },
        py::arg("model"), py::arg("y"), py::arg("lambda_"), py::arg("sigma"),
        py::arg("tolerance") = 1e-5, py::arg("max_iterations") = 1000, py::arg("step") = 0.0,
        "Accelerated restarted gradient descent on 0.5||x-y||^2 + lambda R_sigma(x).");

    py::class_<ForwardOperator>(m, "ForwardOperator")
        .def_property_readonly("kind", &ForwardOperator::kind)
        .def_property_readonly("measurement_size", &ForwardOperator::measurement_size)
        .def("apply",
             [](const ForwardOperator& op,
                const py::array_t<double, py::array::c_style | py::array::forcecast>& x) {
                 return from_vec(op.apply(to_image(x)));
             })
        .def("adjoint",
             [](const ForwardOperator& op,
                const py::array_t<double, py::array::c_style | py::array::forcecast>& v) {
                 return from_image(op.adjoint(to_vec(v)));
             })
        .def("norm_estimate", &ForwardOperator::norm_estimate);

    py::class_<IdentityOp, ForwardOperator>(m, "IdentityOp")
        .def(py::init<int, int>(), py::arg("rows"), py::arg("cols"));
    py::class_<BlurOp, ForwardOperator>(m, "BlurOp")
        .def(py::init([](int rows, int cols,
                         const py::array_t<double, py::array::c_style | py::array::forcecast>&
                             kernel) { return BlurOp(rows, cols, to_image(kernel)); }),
             py::arg("rows"), py::arg("cols"), py::arg("kernel"));
    py::class_<MriOp, ForwardOperator>(m, "MriOp")
        .def(py::init<int, std::vector<int>>(), py::arg("n"), py::arg("mask_columns"))
        .def_property_readonly("mask", &MriOp::mask);
    py::class_<CtOp, ForwardOperator>(m, "CtOp")
        .def(py::init<int, std::vector<double>, int>(), py::arg("n"), py::arg("angles"),
             py::arg("detectors"))
        .def("fbp",
             [](const CtOp& op,
                const py::array_t<double, py::array::c_style | py::array::forcecast>& sino) {
                 return from_image(op.fbp(to_vec(sino)));
             },
             py::arg("sinogram"), "Ram-Lak filtered back projection.");

    m.def("build_mri_mask", &build_mri_mask, py::arg("n"), py::arg("m_acc"), py::arg("m_cf"),
          py::arg("seed"),
          "Cartesian column mask in fftshifted coordinates.");
    m.def("uniform_angles", &uniform_angles, py::arg("count"));
    m.def(
        "simulate",
        [](const ForwardOperator& op,
           const py::array_t<double, py::array::c_style | py::array::forcecast>& x,
           double sigma_w, std::uint64_t seed) {
            return from_vec(simulate(op, to_image(x), sigma_w, seed).values);
        },
        py::arg("op"), py::arg("x"), py::arg("sigma_w"), py::arg("seed"),
        "y = Hx + w with seeded Gaussian noise.");

    m.def(
        "psnr",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& a,
           const py::array_t<double, py::array::c_style | py::array::forcecast>& b) {
            return psnr(to_image(a), to_image(b));
        },
        py::arg("x"), py::arg("ref"));
    m.def(
        "ssim",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& a,
           const py::array_t<double, py::array::c_style | py::array::forcecast>& b) {
            return ssim(to_image(a), to_image(b));
        },
        py::arg("x"), py::arg("ref"));

    m.def("impulse_response",
          [](const MfoeModel& model) { return from_image(impulse_response(model)); });
    m.def(
        "frequency_response",
        [](const MfoeModel& model, int fft_size) {
            return from_image(frequency_response(model, fft_size));
        },
        py::arg("model"), py::arg("fft_size") = 1500);
    m.def(
        "min_singular_value",
        [](const MfoeModel& model, int image_size) {
            const auto r = min_singular_value(model, image_size);
            py::dict d;
            d["sigma_max"] = r.sigma_max;
            d["sigma_min"] = r.sigma_min;
            d["iterations"] = r.iterations;
            d["image_size"] = r.image_size;
            return d;
        },
        py::arg("model"), py::arg("image_size") = 64);

    m.def(
        "export_potential_surface",
        [](const PotentialGroup& g, double lo, double hi, int samples) {
            return from_image(export_potential_surface(g, lo, hi, samples));
        },
        py::arg("group"), py::arg("lo") = -1.0, py::arg("hi") = 1.0, py::arg("samples") = 101,
        "psi sampled over a square grid in the first two coordinates.");

    m.def(
        "run_experiment",
        [](const std::string& config_path) {
            const auto result = run_experiment(load_experiment_config(config_path));
            py::dict d;
            d["mean_psnr"] = result.mean_psnr;
            d["mean_ssim"] = result.mean_ssim;
            d["mean_runtime_s"] = result.mean_runtime_s;
            py::list recs;
            for (const auto& r : result.records) {
                py::dict rd;
                rd["id"] = r.id;
                rd["psnr"] = r.psnr;
                rd["ssim"] = r.ssim;
                rd["runtime_s"] = r.runtime_s;
                recs.append(rd);
            }
            d["records"] = recs;
            return d;
        },
        py::arg("config_path"), "Run a TOML-described experiment end to end.");
}
