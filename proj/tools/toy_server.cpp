// Serves the built-in toy backend over the wire protocol, either on stdio
// (for exec: endpoints) or on a loopback TCP port.
#include <csignal>
#include <iostream>
#include <thread>

#include <CLI11.hpp>

#include "latentopt/mock_server.hpp"
#include "latentopt/toy_backend.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Toy model server", "latentopt_toyserver"};
  bool stdio = false;
  app.add_flag("--stdio", stdio, "Serve one session on stdin/stdout");
  CLI11_PARSE(app, argc, argv);

  auto backend = std::make_shared<latentopt::ToyBackend>(latentopt::default_toy_model());
  if (stdio) {
    latentopt::serve_stream(backend, 0, 1);
    return 0;
  }
  std::signal(SIGPIPE, SIG_IGN);
  latentopt::MockServer server(backend);
  std::cout << server.endpoint() << std::endl;
  for (;;) std::this_thread::sleep_for(std::chrono::hours(1));
}
