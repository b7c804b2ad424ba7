from waypointnav.modules.plotting.render import render_episode
from .run import run as run
