from unittest.mock import patch

from django.test import override_settings
from django.urls import reverse
from rest_framework import status
from rest_framework.test import APIClient, APITestCase

from ..models import AuditRun
from .factory import AuditRunFactory, UserFactory


class BaseViewTest(APITestCase):
    def setUp(self):
        self.staff_user = UserFactory(is_staff=True)
        self.client = APIClient()
        self.client.force_authenticate(user=self.staff_user)


class StatusViewTest(BaseViewTest):
    def test_status(self):
        response = self.client.get('/api/status/')
        self.assertEqual(response.status_code, status.HTTP_200_OK)
        self.assertEqual(response.data, {'status': 'OK'})


class PointViewTest(BaseViewTest):
    def test_scheme_a_point(self):
        response = self.client.post(reverse('point'), {'scheme': 'mds-a', 'n': 2, 'k': 2}, format='json')
        self.assertEqual(response.status_code, status.HTTP_200_OK)
        self.assertEqual((response.data['M'], response.data['R']), ("1/3", "4/3"))
        self.assertEqual(response.data['source'], "thm2")

    def test_measured_point(self):
        response = self.client.post(reverse('point'), {'scheme': 'mds-b', 'n': 3, 'k': 3, 'measure': True},
                                    format='json')
        self.assertEqual(response.status_code, status.HTTP_200_OK)
        self.assertEqual(response.data['measured']['payload_M'], "3/8")
        self.assertEqual(response.data['measured']['payload_R'], "2")

    def test_share_point(self):
        data = {'scheme': 'share', 'n': 2, 'k': 2, 'alpha': '1/2', 'first': 'vu', 'first_r': 1, 'second': 'trivial'}
        response = self.client.post(reverse('point'), data, format='json')
        self.assertEqual(response.status_code, status.HTTP_200_OK)
        self.assertEqual((response.data['M'], response.data['R']), ("1/2", "4/3"))

    def test_scheme_constraints_are_validation_errors(self):
        response = self.client.post(reverse('point'), {'scheme': 'mds-b', 'n': 2, 'k': 3}, format='json')
        self.assertEqual(response.status_code, status.HTTP_400_BAD_REQUEST)
        self.assertIn('scheme', response.data)

    def test_anonymous_access(self):
        self.client.force_authenticate(user=None)
        response = self.client.post(reverse('point'), {'scheme': 'trivial', 'n': 2, 'k': 2}, format='json')
        self.assertEqual(response.status_code, status.HTTP_200_OK)


class CurveViewTest(BaseViewTest):
    def test_curve_csv(self):
        response = self.client.post(reverse('curve'), {'n': 2, 'k': 3, 'samples': 5}, format='json')
        self.assertEqual(response.status_code, status.HTTP_200_OK)
        self.assertEqual(response['Content-Type'], 'text/csv')
        lines = response.content.decode().splitlines()
        self.assertEqual(lines[0], "M,R,series,valid")
        self.assertIn("1,0.666666666667,grk,prior-work", lines)

    def test_too_few_samples(self):
        response = self.client.post(reverse('curve'), {'n': 2, 'k': 3, 'samples': 1}, format='json')
        self.assertEqual(response.status_code, status.HTTP_400_BAD_REQUEST)


class SimulateViewTest(BaseViewTest):
    def test_round_decodes(self):
        data = {'scheme': 'vu', 'n': 2, 'k': 3, 'r': 2, 'demand': [0, 1, 1], 'table': True}
        response = self.client.post(reverse('simulate'), data, format='json')
        self.assertEqual(response.status_code, status.HTTP_200_OK)
        self.assertIsNone(response.data['first_failure'])
        self.assertEqual(response.data['payload_segments'], 6)
        self.assertEqual(response.data['aux_variables'], ['d', 't_d'])
        self.assertEqual(len(response.data['table']['payload']), 6)
        self.assertEqual(response.data['measured']['payload_R'], "1")

    def test_demand_out_of_range(self):
        data = {'scheme': 'mds-a', 'n': 2, 'k': 2, 'demand': [0, 5]}
        response = self.client.post(reverse('simulate'), data, format='json')
        self.assertEqual(response.status_code, status.HTTP_400_BAD_REQUEST)
        self.assertIn('demand', response.data)


class AuditRunViewSetTest(BaseViewTest):
    @patch('api.views.run_audit.delay')
    def test_create_queues_the_run(self, mock_delay):
        data = {'kind': 'privacy', 'scheme': 'mds-a', 'params': {'n': 2, 'k': 2}, 'trials': 3}
        response = self.client.post(reverse('audit-runs-list'), data, format='json')
        self.assertEqual(response.status_code, status.HTTP_201_CREATED)
        run = AuditRun.objects.get(id=response.data['id'])
        self.assertEqual(run.mode, 'rank')
        self.assertEqual(run.status, AuditRun.Status.Pending)
        self.assertEqual(run.requested_by, self.staff_user)
        self.assertEqual(run.seed, 20240901)
        mock_delay.assert_called_once_with(run.id)

    @override_settings(PRIVCACHE_ENUMERATION_CEILING=1000)
    @patch('api.views.run_audit.delay')
    def test_infeasible_exact_audit_is_refused(self, mock_delay):
        data = {'kind': 'privacy', 'scheme': 'vu', 'params': {'n': 2, 'k': 2, 'r': 1}, 'mode': 'exact'}
        response = self.client.post(reverse('audit-runs-list'), data, format='json')
        self.assertEqual(response.status_code, status.HTTP_422_UNPROCESSABLE_ENTITY)
        self.assertEqual(response.data['states'], 3072)
        self.assertEqual(response.data['ceiling'], 1000)
        self.assertTrue(response.data['hint'])
        self.assertFalse(AuditRun.objects.exists())
        mock_delay.assert_not_called()

    @patch('api.views.run_audit.delay')
    def test_mode_that_does_not_apply(self, mock_delay):
        data = {'kind': 'privacy', 'scheme': 'mds-a', 'params': {'n': 2, 'k': 2}, 'mode': 'exact'}
        response = self.client.post(reverse('audit-runs-list'), data, format='json')
        self.assertEqual(response.status_code, status.HTTP_400_BAD_REQUEST)
        mock_delay.assert_not_called()

    def test_unknown_params(self):
        data = {'kind': 'correctness', 'scheme': 'mds-a', 'params': {'n': 2, 'k': 2, 'colour': 'red'}}
        response = self.client.post(reverse('audit-runs-list'), data, format='json')
        self.assertEqual(response.status_code, status.HTTP_400_BAD_REQUEST)
        self.assertIn('params', response.data)

    def test_colluding_needs_colluders(self):
        data = {'kind': 'colluding', 'scheme': 'vu', 'params': {'n': 2, 'k': 2, 'r': 1}}
        response = self.client.post(reverse('audit-runs-list'), data, format='json')
        self.assertEqual(response.status_code, status.HTTP_400_BAD_REQUEST)

    def test_anonymous_users_can_read_but_not_create(self):
        AuditRunFactory()
        self.client.force_authenticate(user=None)
        self.assertEqual(self.client.get(reverse('audit-runs-list')).status_code, status.HTTP_200_OK)
        data = {'kind': 'correctness', 'scheme': 'mds-a', 'params': {'n': 2, 'k': 2}}
        response = self.client.post(reverse('audit-runs-list'), data, format='json')
        self.assertIn(response.status_code, (status.HTTP_401_UNAUTHORIZED, status.HTTP_403_FORBIDDEN))

    def test_report(self):
        pending = AuditRunFactory()
        response = self.client.get(reverse('audit-runs-report', kwargs={'pk': pending.id}))
        self.assertEqual(response.status_code, status.HTTP_404_NOT_FOUND)
        self.assertEqual(response.data['status'], AuditRun.Status.Pending)

        done = AuditRunFactory()
        done.mark_completed({'pass': True, 'checks': []})
        response = self.client.get(reverse('audit-runs-report', kwargs={'pk': done.id}))
        self.assertEqual(response.status_code, status.HTTP_200_OK)
        self.assertTrue(response.data['pass'])

    def test_by_scheme(self):
        AuditRunFactory(scheme='mds-a')
        AuditRunFactory(scheme='vu', params={'n': 2, 'k': 2, 'r': 1})
        response = self.client.get(reverse('audit-runs-by-scheme'), {'scheme': 'vu'})
        self.assertEqual(response.status_code, status.HTTP_200_OK)
        self.assertEqual([run['scheme'] for run in response.data], ['vu'])
