#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "cefr/catalog.hpp"
#include "cefr/corpus.hpp"
#include "cefr/error.hpp"
#include "cefr/extract.hpp"
#include "cefr/resources.hpp"
#include "cefr/service.hpp"

namespace py = pybind11;

namespace {

cefr::FeatureCatalog without_errors(const cefr::FeatureCatalog& catalog) {
  std::vector<cefr::FeatureDef> defs;
  for (const auto& d : catalog.defs()) {
    if (d.category != cefr::Category::kError) defs.push_back(d);
  }
  return cefr::FeatureCatalog(defs);
}

// Feature id -> value, None where the feature is undefined for the text.
py::dict extract(const std::string& conllu, const std::optional<std::filesystem::path>& resources) {
  cefr::Document doc;
  doc.doc_id = "input";
  doc.sentences = cefr::parse_conllu_string(conllu);
  if (doc.word_count() == 0) throw cefr::DataError("document has no words");
  const cefr::LexicalResources res =
      resources ? cefr::load_resources(cefr::ResourcePaths::in_directory(*resources)) : cefr::LexicalResources{};
  const auto values = cefr::extract_document(doc, without_errors(cefr::FeatureCatalog::standard()), res, nullptr);
  py::dict out;
  for (const auto& [id, v] : values) {
    out[py::str(id)] = v.degenerate ? py::object(py::none()) : py::object(py::float_(v.value));
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "CEFR level assessment of Estonian learner texts";

  auto base = py::register_exception<cefr::Error>(m, "CefrError", PyExc_RuntimeError);
  py::register_exception<cefr::ParseError>(m, "ParseError", base.ptr());
  py::register_exception<cefr::DataError>(m, "DataError", base.ptr());
  py::register_exception<cefr::ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<cefr::UpstreamError>(m, "UpstreamError", base.ptr());

  m.def("catalog_json", [] { return cefr::FeatureCatalog::standard().to_json().dump(); },
        "The built-in feature catalog as JSON text.");
  m.def("catalog_hash", [] { return cefr::FeatureCatalog::standard().hash(); });
  m.def("extract", &extract, py::arg("conllu"), py::arg("resources") = py::none(),
        "Lexical, morphological and surface features of one CoNLL-U document.");

  py::class_<cefr::AssessService>(m, "Service")
      .def(py::init([](const std::filesystem::path& config) {
             return cefr::AssessService::from_config(cefr::ServiceConfig::load(config));
           }),
           py::arg("config"))
      .def_property_readonly("ready", &cefr::AssessService::ready)
      .def(
          "assess_raw",
          [](const cefr::AssessService& s, const std::string& body) {
            cefr::HttpReply reply;
            {
              py::gil_scoped_release release;
              reply = s.assess(body);
            }
            return py::make_tuple(reply.status, reply.body.dump());
          },
          py::arg("body"), "POST /assess; returns (status, JSON text).")
      .def("health_json", [](const cefr::AssessService& s) { return s.health().dump(); })
      .def("models_json", [](const cefr::AssessService& s) { return s.models().dump(); });
}
