# Import all command modules to make them available when importing the commands package
from commands.calibration_commands import calibration_bp
from commands.model_commands import model_bp
from commands.search_commands import search_bp
from commands.simulation_commands import simulation_bp

# List of all blueprints to register with the Flask app
blueprints = [simulation_bp, calibration_bp, model_bp, search_bp]
