#include "genusg/genusg.h"

#include <cstring>
#include <string>

#include "genusg/commands.hpp"
#include "genusg/parallel.hpp"
#include "genusg/variations.hpp"
#include "genusg/virgraphs.hpp"

struct genusg_surface {
  genusg::SurfaceContext ctx;
};

namespace {

thread_local std::string last_error;

genusg_status status_of(genusg::ErrorKind k) {
  switch (k) {
    case genusg::ErrorKind::InvalidInput: return GENUSG_ERR_INVALID_INPUT;
    case genusg::ErrorKind::Domain: return GENUSG_ERR_DOMAIN;
    case genusg::ErrorKind::NumericalGuard: return GENUSG_ERR_NUMERICAL_GUARD;
    case genusg::ErrorKind::NotConverged: return GENUSG_ERR_NOT_CONVERGED;
  }
  return GENUSG_ERR_INTERNAL;
}

template <class Body>
genusg_status guarded(Body&& body) {
  last_error.clear();
  try {
    body();
    return GENUSG_OK;
  } catch (const genusg::Error& e) {
    last_error = e.what();
    return status_of(e.kind());
  } catch (const nlohmann::json::exception& e) {
    last_error = e.what();
    return GENUSG_ERR_INVALID_INPUT;
  } catch (const std::exception& e) {
    last_error = e.what();
    return GENUSG_ERR_INTERNAL;
  } catch (...) {
    last_error = "unknown failure";
    return GENUSG_ERR_INTERNAL;
  }
}

genusg::Complex in(genusg_complex z) { return {z.re, z.im}; }
genusg_complex out(genusg::Complex z) { return {z.real(), z.imag()}; }

void require(bool ok, const char* what) {
  if (!ok) throw genusg::Error(genusg::ErrorKind::InvalidInput, what);
}

}  // namespace

extern "C" {

const char* genusg_version(void) { return "1.0.0"; }

const char* genusg_last_error(void) { return last_error.c_str(); }

void genusg_set_threads(unsigned n) { genusg::set_thread_count(n); }

genusg_status genusg_surface_create(const char* config_json, genusg_surface** result) {
  return guarded([&] {
    require(config_json && result, "null argument");
    *result = nullptr;
    const auto cfg = genusg::parse_config(nlohmann::json::parse(config_json));
    *result = new genusg_surface{genusg::SurfaceContext(genusg::Surface(cfg.params, cfg.policy))};
  });
}

void genusg_surface_free(genusg_surface* s) { delete s; }

int genusg_surface_genus(const genusg_surface* s) { return s ? s->ctx.surface().genus() : 0; }

genusg_status genusg_omega(const genusg_surface* s, genusg_complex x, genusg_complex y, genusg_complex* result) {
  return guarded([&] {
    require(s && result, "null argument");
    *result = out(genusg::omega(s->ctx.surface(), in(x), in(y)).value);
  });
}

genusg_status genusg_nu(const genusg_surface* s, int a, genusg_complex x, genusg_complex* result) {
  return guarded([&] {
    require(s && result, "null argument");
    require(a >= 1 && a <= s->ctx.surface().genus(), "handle index out of range");
    *result = out(genusg::nu(s->ctx.surface(), a, in(x)).value);
  });
}

genusg_status genusg_projective_connection(const genusg_surface* s, genusg_complex x, genusg_complex* result) {
  return guarded([&] {
    require(s && result, "null argument");
    *result = out(genusg::projective_connection(s->ctx.surface(), in(x)).value);
  });
}

genusg_status genusg_period_matrix(const genusg_surface* s, genusg_complex* result, size_t capacity) {
  return guarded([&] {
    require(s && result, "null argument");
    const int g = s->ctx.surface().genus();
    require(capacity >= static_cast<size_t>(g * g), "output buffer too small");
    const auto& tau = s->ctx.tau();
    for (int i = 0; i < g; ++i)
      for (int j = 0; j < g; ++j) result[i * g + j] = out(tau(i, j));
  });
}

uint64_t genusg_graph_count(int n) { return genusg::graph_count(n); }

genusg_status genusg_run(const char* command, const char* request_json, char** report, int* exit_code) {
  return guarded([&] {
    require(command && report && exit_code, "null argument");
    *report = nullptr;
    nlohmann::json request = nlohmann::json::object();
    if (request_json && *request_json) {
      try {
        request = nlohmann::json::parse(request_json);
      } catch (const nlohmann::json::exception& e) {
        request = nullptr;
        last_error = e.what();
      }
    }
    genusg::CommandResult r =
        request.is_null()
            ? genusg::CommandResult{2, {{"command", command},
                                        {"pass", false},
                                        {"error", {{"kind", "invalid_input"}, {"message", last_error}}}}}
            : genusg::run_command(command, request);
    const std::string text = r.report.dump(2);
    char* buf = new char[text.size() + 1];
    std::memcpy(buf, text.c_str(), text.size() + 1);
    *report = buf;
    *exit_code = r.exit_code;
  });
}

void genusg_string_free(char* s) { delete[] s; }

}  // extern "C"
