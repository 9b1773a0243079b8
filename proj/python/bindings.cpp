#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "laakso/certifier.hpp"
#include "laakso/doubling.hpp"
#include "laakso/embedding_lab.hpp"
#include "laakso/errors.hpp"
#include "laakso/instance.hpp"
#include "laakso/io.hpp"
#include "laakso/metric.hpp"

namespace py = pybind11;

namespace {

using laakso::Embedding;
using laakso::Instance;

py::object to_py(const nlohmann::json& j) {
    switch (j.type()) {
        case nlohmann::json::value_t::null: return py::none();
        case nlohmann::json::value_t::boolean: return py::bool_(j.get<bool>());
        case nlohmann::json::value_t::number_integer: return py::int_(j.get<std::int64_t>());
        case nlohmann::json::value_t::number_unsigned: return py::int_(j.get<std::uint64_t>());
        case nlohmann::json::value_t::number_float: return py::float_(j.get<double>());
        case nlohmann::json::value_t::string: return py::str(j.get<std::string>());
        case nlohmann::json::value_t::array: {
            py::list out;
            for (const auto& v : j) out.append(to_py(v));
            return std::move(out);
        }
        case nlohmann::json::value_t::object: {
            py::dict out;
            for (const auto& [key, v] : j.items()) out[py::str(key)] = to_py(v);
            return std::move(out);
        }
        default: return py::none();
    }
}

py::array_t<double> matrix(const std::vector<double>& values, std::size_t rows, std::size_t cols) {
    py::array_t<double> out({rows, cols});
    std::copy(values.begin(), values.end(), out.mutable_data());
    return out;
}

Embedding embedding_from_array(py::array_t<double, py::array::c_style | py::array::forcecast> images, double q,
                               const std::string& method, std::uint64_t seed) {
    if (images.ndim() != 2) throw laakso::PreconditionError("images must be a 2-d array (n x d)");
    Embedding emb;
    emb.d = static_cast<int>(images.shape(1));
    emb.q = q;
    emb.images.assign(images.data(), images.data() + images.size());
    emb.meta.method = method;
    emb.meta.seed = seed;
    return emb;
}

laakso::OptimizerConfig make_config(std::uint64_t seed, int restarts, int iterations, double step_size,
                                    double temperature, const std::string& init, const std::string& decay) {
    laakso::OptimizerConfig cfg;
    cfg.seed = seed;
    cfg.restarts = restarts;
    cfg.iterations = iterations;
    cfg.step_size = step_size;
    cfg.temperature = temperature;
    cfg.init = laakso::init_from_name(init);
    cfg.decay = laakso::decay_from_name(decay);
    return cfg;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Recursive l_p instance construction, distortion certificates and embedding experiments.";

    static py::exception<laakso::Error> error_type(m, "LaaksoError", PyExc_ValueError);
    py::register_exception_translator([](std::exception_ptr ptr) {
        try {
            if (ptr) std::rethrow_exception(ptr);
        } catch (const laakso::Error& e) {
            PyErr_SetString(error_type.ptr(), (e.kind() + ": " + e.what()).c_str());
        }
    });

    py::class_<Instance>(m, "Instance")
        .def_property_readonly("n", &Instance::n)
        .def_property_readonly("k", &Instance::k)
        .def_property_readonly("p", [](const Instance& i) { return i.params().p; })
        .def_property_readonly("eps", [](const Instance& i) { return i.params().eps; })
        .def_property_readonly("degenerate", &Instance::degenerate)
        .def("coords", [](const Instance& inst) {
            std::vector<double> flat;
            flat.reserve(inst.n() * inst.dim());
            for (const auto& pt : inst.points()) flat.insert(flat.end(), pt.coords.begin(), pt.coords.end());
            return matrix(flat, inst.n(), inst.dim());
        }, "Point coordinates as an n x (k+1) array.")
        .def("edges", [](const Instance& inst) {
            py::list out;
            for (const auto& e : inst.edges()) {
                out.append(py::make_tuple(e.id, e.a, e.b, e.level,
                                          e.parent ? py::object(py::int_(*e.parent)) : py::none(),
                                          std::string(laakso::role_name(e.role))));
            }
            return out;
        }, "List of (id, a, b, level, parent, role).")
        .def("diagonals", [](const Instance& inst) {
            py::list out;
            for (const auto& d : inst.diagonals()) out.append(py::make_tuple(d.u, d.v, d.level, d.parent));
            return out;
        })
        .def("edge_length", &Instance::edge_length)
        .def("to_json", [](const Instance& inst) { return laakso::io::dump(laakso::io::to_json(inst)); })
        .def_static("from_json", [](const std::string& text) {
            return laakso::io::instance_from_json(nlohmann::json::parse(text));
        });

    py::class_<Embedding>(m, "Embedding")
        .def(py::init(&embedding_from_array), py::arg("images"), py::arg("q"), py::arg("method") = "external",
             py::arg("seed") = 0)
        .def_readonly("d", &Embedding::d)
        .def_readonly("q", &Embedding::q)
        .def_property_readonly("method", [](const Embedding& e) { return e.meta.method; })
        .def_property_readonly("seed", [](const Embedding& e) { return e.meta.seed; })
        .def_property_readonly("images", [](const Embedding& e) {
            return matrix(e.images, e.size(), static_cast<std::size_t>(e.d));
        })
        .def("to_json", [](const Embedding& e) { return laakso::io::dump(laakso::io::to_json(e)); });

    m.def("build_instance", [](double p, double eps, int k) { return laakso::build_instance({p, eps, k}); },
          py::arg("p"), py::arg("eps"), py::arg("k"));
    m.def("closed_form_counts", [](int k) {
        const auto c = laakso::closed_form_counts(k);
        return py::make_tuple(c.n, c.edges_per_level);
    });
    m.def("lp_dist", [](const std::vector<double>& x, const std::vector<double>& y, double p) {
        return laakso::lp_dist(x, y, p);
    });
    m.def("point_segment_distance", [](const std::vector<double>& x, const std::vector<double>& a,
                                       const std::vector<double>& b, double p) {
        return laakso::point_segment_distance(x, a, b, p);
    });
    m.def("identity_embedding", [](const Instance& inst) { return laakso::identity_embedding(inst); });
    m.def("distortion", [](const Instance& inst, const Embedding& emb) {
        return to_py(laakso::io::to_json(laakso::distortion(inst, emb)));
    });
    m.def("normalize_nonexpansive", &laakso::normalize_nonexpansive);

    m.def("edge_potential", &laakso::edge_potential);
    m.def("potential_cap", &laakso::potential_cap, py::arg("d"), py::arg("p"));
    m.def("epsilon_for", &laakso::epsilon_for, py::arg("d"), py::arg("D"), py::arg("p"));
    m.def("certified_lower_bound", [](const Instance& inst, int d) { return laakso::certified_lower_bound(inst, d); },
          py::arg("instance"), py::arg("d"));
    m.def("witness_chain", [](const Instance& inst, const Embedding& emb, double D) {
        const auto cp = laakso::make_certifier_params(emb.d, D, inst.params().p, inst.params().eps);
        return to_py(laakso::io::to_json(laakso::witness_chain(inst, emb, cp)));
    }, py::arg("instance"), py::arg("embedding"), py::arg("D"));

    m.def("gaussian_projection", [](const Instance& inst, int d, std::uint64_t seed) {
        return laakso::gaussian_projection(inst, d, seed);
    }, py::arg("instance"), py::arg("d"), py::arg("seed"));
    m.def("stress_minimize",
          [](const Instance& inst, int d, std::uint64_t seed, int restarts, int iterations, double step_size,
             double temperature, const std::string& init, const std::string& decay) {
              const auto cfg = make_config(seed, restarts, iterations, step_size, temperature, init, decay);
              py::gil_scoped_release release;
              return laakso::stress_minimize(inst, d, cfg).embedding;
          },
          py::arg("instance"), py::arg("d"), py::arg("seed") = 1, py::arg("restarts") = 5,
          py::arg("iterations") = 300, py::arg("step_size") = 0.2, py::arg("temperature") = 0.01,
          py::arg("init") = "projection-warm-start", py::arg("decay") = "inv-sqrt");

    m.def("doubling_estimate", [](const Instance& inst, const std::vector<double>& radii) {
        return to_py(laakso::io::to_json(laakso::doubling_estimate(inst, radii)));
    }, py::arg("instance"), py::arg("radii") = std::vector<double>{});
    m.def("envelope_check", [](const Instance& inst) {
        return to_py(laakso::io::to_json(laakso::envelope_check(inst)));
    });
}
