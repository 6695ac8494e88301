#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <string>
#include <vector>

#include "json.hpp"

#include "owlaudit/cli.hpp"
#include "owlaudit/harness.hpp"
#include "owlaudit/model.hpp"
#include "owlaudit/oracle.hpp"
#include "owlaudit/reasoner.hpp"
#include "owlaudit/scenarios.hpp"
#include "owlaudit/stats.hpp"
#include "owlaudit/turtle.hpp"
#include "owlaudit/version.hpp"

namespace py = pybind11;
namespace oa = owlaudit;
using nlohmann::json;

namespace {

py::object to_py(const json& j) {
  switch (j.type()) {
    case json::value_t::null: return py::none();
    case json::value_t::boolean: return py::bool_(j.get<bool>());
    case json::value_t::number_integer: return py::int_(j.get<std::int64_t>());
    case json::value_t::number_unsigned: return py::int_(j.get<std::uint64_t>());
    case json::value_t::number_float: return py::float_(j.get<double>());
    case json::value_t::string: return py::str(j.get<std::string>());
    case json::value_t::array: {
      py::list l;
      for (const auto& e : j) l.append(to_py(e));
      return l;
    }
    case json::value_t::object: {
      py::dict d;
      for (const auto& [k, v] : j.items()) d[py::str(k)] = to_py(v);
      return d;
    }
    default: break;
  }
  throw std::runtime_error("unsupported JSON value");
}

json from_py(const py::handle& o) {
  auto dumps = py::module_::import("json").attr("dumps");
  return json::parse(dumps(o).cast<std::string>());
}

oa::oracle::Answer answer_of(const std::string& s) {
  auto a = oa::oracle::parse_answer_value(s);
  if (!a) throw py::value_error("answer must be yes, no or unknown, got '" + s + "'");
  return *a;
}

py::dict verdict_dict(const oa::oracle::Verdict& v) {
  py::dict d;
  d["answer"] = std::string(oa::oracle::to_string(v.answer));
  d["pos_consistent"] = v.pos_consistent;
  d["neg_consistent"] = v.neg_consistent;
  return d;
}

py::dict scenario_dict(const oa::scenarios::Scenario& s) {
  py::dict d;
  d["id"] = s.id;
  d["category"] = std::string(oa::scenarios::to_string(s.category));
  d["provenance"] = std::string(oa::scenarios::to_string(s.provenance));
  d["ontology"] = s.ontology_text;
  d["queries"] = to_py(oa::scenarios::queries_to_json(s.queries));
  return d;
}

py::object model_answer(const oa::harness::ModelAnswer& a) { return to_py(oa::harness::to_json(a)); }

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Reasoner-grounded auditing of LLM answers over OWL 2 ontologies";
  m.attr("__version__") = std::string(oa::kVersion);

  py::register_exception<oa::turtle::ParseError>(m, "TurtleParseError", PyExc_ValueError);
  py::register_exception<oa::model::ExtractError>(m, "ExtractError", PyExc_ValueError);
  py::register_exception<oa::oracle::KbInconsistentError>(m, "KbInconsistentError", PyExc_RuntimeError);
  py::register_exception<oa::harness::HarnessError>(m, "HarnessError", PyExc_ValueError);
  py::register_exception<oa::stats::StatsError>(m, "StatsError", PyExc_ValueError);

  m.def("canonical_turtle", [](const std::string& text) { return oa::turtle::serialize_turtle(oa::turtle::parse_turtle(text)); },
        py::arg("text"), "Parse Turtle and re-serialize it deterministically.");
  m.def(
      "isomorphic",
      [](const std::string& a, const std::string& b) {
        return oa::turtle::isomorphic(oa::turtle::parse_turtle(a), oa::turtle::parse_turtle(b));
      },
      py::arg("a"), py::arg("b"));
  m.def("triple_count", [](const std::string& text) { return oa::turtle::parse_turtle(text).size(); }, py::arg("text"));

  m.def(
      "is_consistent",
      [](const std::string& text) {
        return oa::reasoner::is_consistent(oa::model::extract_ontology(oa::turtle::parse_turtle(text)));
      },
      py::arg("text"));

  m.def(
      "classify",
      [](const std::string& text, const std::string& individual, const std::string& cls) {
        auto o = oa::model::extract_ontology(oa::turtle::parse_turtle(text));
        oa::oracle::Query q;
        q.id = "q";
        q.individual = individual;
        q.cls = cls;
        return verdict_dict(oa::oracle::classify(o, q));
      },
      py::arg("ontology"), py::arg("individual"), py::arg("cls"),
      "Three-valued membership of individual in cls: yes, no or unknown.");

  m.def("reference_scenario", [] { return scenario_dict(oa::scenarios::reference_scenario()); });
  m.def(
      "generate_expansion",
      [](const py::object& config) {
        auto cfg = config.is_none() ? oa::scenarios::ExpansionConfig{}
                                    : oa::scenarios::ExpansionConfig::from_json(from_py(config));
        cfg.validate();
        py::list out;
        for (const auto& s : oa::scenarios::generate_expansion(cfg)) out.append(scenario_dict(s));
        return out;
      },
      py::arg("config") = py::none());
  m.def(
      "audit",
      [](const std::string& scenario_id, const std::string& text, const py::object& queries) {
        auto s = oa::scenarios::make_scenario(scenario_id, oa::scenarios::Category::Mixed,
                                              oa::scenarios::Provenance::HandAuthored, text, {});
        std::vector<oa::oracle::Query> qs;
        for (const auto& q : from_py(queries)) {
          oa::oracle::Query query;
          query.id = q.at("id").get<std::string>();
          query.individual = q.at("individual").get<std::string>();
          query.cls = q.at("class").get<std::string>();
          query.question = q.value("question", "");
          qs.push_back(std::move(query));
        }
        return to_py(oa::oracle::gold_to_json(scenario_id, oa::oracle::audit_scenario(s.ontology, qs)));
      },
      py::arg("scenario_id"), py::arg("ontology"), py::arg("queries"));

  m.def("parse_answer", [](const std::string& raw) { return model_answer(oa::harness::parse_answer(raw)); },
        py::arg("raw"));
  m.def(
      "build_followup",
      [](const std::string& mode, const std::string& gold, const std::string& given) {
        oa::harness::ModelAnswer g = oa::harness::MalformedAnswer{given};
        if (auto a = oa::oracle::parse_answer_value(given)) g = oa::harness::ParsedAnswer{*a, ""};
        return oa::harness::build_followup(oa::harness::parse_mode(mode), answer_of(gold), g);
      },
      py::arg("mode"), py::arg("gold"), py::arg("given"));
  m.def("prompt_template_hash", &oa::harness::initial_template_hash);

  m.def(
      "wilson_interval",
      [](std::uint64_t k, std::uint64_t n, double alpha) {
        auto ci = oa::stats::wilson_interval(k, n, alpha);
        return py::make_tuple(ci.lo, ci.hi);
      },
      py::arg("k"), py::arg("n"), py::arg("alpha") = 0.05);
  m.def("mcnemar_exact", &oa::stats::mcnemar_exact, py::arg("b"), py::arg("c"));
  m.def("bonferroni", py::overload_cast<const std::vector<double>&>(&oa::stats::bonferroni), py::arg("p_values"));
  m.def(
      "classify_error",
      [](const std::string& gold, const std::string& answer) {
        oa::harness::ModelAnswer a = oa::harness::MalformedAnswer{answer};
        if (auto p = oa::oracle::parse_answer_value(answer)) a = oa::harness::ParsedAnswer{*p, ""};
        return std::string(oa::stats::to_string(oa::stats::classify_error(answer_of(gold), a)));
      },
      py::arg("gold"), py::arg("answer"));

  m.def(
      "cli",
      [](std::vector<std::string> args) {
        args.insert(args.begin(), "owlaudit");
        std::vector<char*> argv;
        for (auto& a : args) argv.push_back(a.data());
        return oa::cli::main(static_cast<int>(argv.size()), argv.data());
      },
      py::arg("args"), "Run the command-line tool in-process; returns its exit code.");
}
