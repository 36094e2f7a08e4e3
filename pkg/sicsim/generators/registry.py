import json
from pathlib import Path
from typing import Dict

from sicsim.core.yuoh import N_EDGES, N_RAYS, ray_table_document, reference_graph


def write_json(file_path: Path, data: Dict) -> bool:
    try:
        file_path = Path(file_path)
        file_path.parent.mkdir(parents=True, exist_ok=True)
        with open(file_path, "w") as f:
            json.dump(data, f, indent=2)
            f.write("\n")
        print(f"✅ Successfully wrote to {file_path}")
        return True
    except OSError as e:
        print(f"❌ Error writing to {file_path}: {e}")
        return False


class RayTableGenerator:
    """Writes the ray table, QRNG codes and orthogonality edges as JSON."""

    def __init__(self, output_path: Path):
        self.output_path = Path(output_path)

    def generate(self) -> bool:
        print("\n--- Generating Ray Table ---")
        document = ray_table_document()
        graph = reference_graph()
        if len(document["rays"]) != N_RAYS or len(graph.edges) != N_EDGES:
            print(f"❌ Error: expected {N_RAYS} rays and {N_EDGES} edges, got {len(document['rays'])} and {len(graph.edges)}")
            return False
        print(f"   Rays: {len(document['rays'])}")
        print(f"   Edges: {len(document['edges'])}")
        return write_json(self.output_path, document)
