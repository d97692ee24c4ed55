"""Deterministic building blocks for agentic HLS accelerator-design flows.

Subpackages and modules:

- ``designspace``: design-space specs, combinatorial expansion, directive
  script emission, manifests.
- ``synthrunner``: parallel execution of design points against pluggable
  synthesis backends, with retries, timeouts, and a deterministic mock.
- ``pareto``: Pareto-front extraction and DSE reporting.
- ``bitwidth``: fixed-point formats, quantization, and bit-width search.
- ``agentloop``: specialist-verifier loop engine and episode metrics.
- ``betatrials``: three-stage trial harness with Beta-Binomial posterior
  analytics and adaptive stopping.
- ``refactor``: C-subset parsing and HLS-compatibility rewrites.
- ``ragkit``: chunking, embedding indexes, and two-stage retrieval.
- ``cli``: one executable exposing all of the above as subcommands.
"""

__version__ = "0.1.0"
