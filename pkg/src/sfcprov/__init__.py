"""Service function chain provisioning toolkit for tree-shaped datacenter networks.

Places VNF instances on servers, routes chain traffic, evaluates expected
end-to-end latency with a finite-buffer queueing model, and generates
server-usage / congestion trade-off reports.
"""

__version__ = "0.1.0"
