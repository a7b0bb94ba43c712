// Deterministic caption generator used by tests and local dry runs.
//   ragcap-stub-generator                 JSON lines on stdin/stdout
//   ragcap-stub-generator --serve PORT    HTTP, POST /caption
// --fail IMAGE_REF (repeatable) answers {"error": ...} for that image.

#include <iostream>
#include <set>
#include <string>

#include <CLI11.hpp>
#include <httplib.h>
#include <json.hpp>

#include "ragcap/pipeline/generator_client.hpp"

namespace {

nlohmann::json answer(const std::string& body, const std::set<std::string>& failing) {
  const auto request = ragcap::pipeline::GeneratorRequest::from_json(nlohmann::json::parse(body));
  if (failing.contains(request.image_ref)) return {{"error", "refused " + request.image_ref}};
  return {{"caption", ragcap::pipeline::stub_caption(request.prompt)}};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"stub caption generator"};
  int port = 0;
  std::string host = "127.0.0.1";
  std::set<std::string> failing;
  app.add_option("--serve", port, "listen on this port instead of using stdin/stdout");
  app.add_option("--host", host, "bind address for --serve");
  app.add_option("--fail", failing, "image refs to refuse");
  CLI11_PARSE(app, argc, argv);

  if (port > 0) {
    httplib::Server server;
    server.Post("/caption", [&](const httplib::Request& req, httplib::Response& res) {
      try {
        res.set_content(answer(req.body, failing).dump(), "application/json");
      } catch (const std::exception& e) {
        res.status = 400;
        res.set_content(nlohmann::json{{"error", e.what()}}.dump(), "application/json");
      }
    });
    return server.listen(host, port) ? 0 : 1;
  }

  std::string line;
  while (std::getline(std::cin, line)) {
    if (line.empty()) continue;
    try {
      std::cout << answer(line, failing).dump() << "\n" << std::flush;
    } catch (const std::exception& e) {
      std::cout << nlohmann::json{{"error", e.what()}}.dump() << "\n" << std::flush;
    }
  }
  return 0;
}
