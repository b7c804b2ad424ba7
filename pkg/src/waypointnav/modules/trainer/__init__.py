from waypointnav.modules.trainer.config import PPOConfig, TrainConfig
from waypointnav.modules.trainer.env import NavigationEnv, run_episode
from waypointnav.modules.trainer.ppo import gae, normalize_advantages, ppo_losses
from waypointnav.modules.trainer.rewards import step_reward
from waypointnav.modules.trainer.rollout import RolloutBuffer, RolloutCollector
from waypointnav.modules.trainer.trainer import train
from .run import run as run
