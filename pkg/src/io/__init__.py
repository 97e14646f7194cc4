from .config_file import parse_value, read_section
from .radial_tsv import read_radial_function, write_radial_function
from .writers import write_curve_svg, write_json, write_manifest, write_tsv
